def helper(nums, y):
    left = 0
    z = len(nums) - 1
    while left <= z:
        p = left + (z - left) // 2
        if nums[p] == y:
            return p
        elif nums[p] < y:
            left = p + 1
        else:
            z = p - 1
    return -1


if __name__ == "__main__":
    seq = [-2, 1, 16, 29, 47, 77, 94, 105, 110, 112]
    print("result:", helper(seq, 119))
