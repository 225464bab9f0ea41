# from class notes
def calc(nums):
    y = len(nums)
    for u in range(y - 1):
        swapped = False
        for w in range(y - u - 1):
            if nums[w] > nums[w + 1]:
                swap = nums[w]
                nums[w] = nums[w + 1]
                nums[w + 1] = swap
                swapped = True
        if not swapped:
            break
    return nums


a = [-25, -32, 4, 25, 87, -11, 3]
calc(a)
print("result:", a)
