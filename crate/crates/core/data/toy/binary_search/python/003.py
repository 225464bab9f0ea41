def compute(nums, z):
    x, num = 0, len(nums) - 1
    while x <= num:
        i = (x + num) // 2
        if nums[i] == z:
            return i
        elif nums[i] < z:
            x = i + 1
        else:
            num = i - 1
    return -1


if __name__ == "__main__":
    xs = [30, 30, 37, 43, 56, 58, 73, 98, 99, 114]
    print(compute(xs, 53))
