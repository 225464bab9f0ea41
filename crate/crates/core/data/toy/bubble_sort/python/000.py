# iterative
def calc(nums):
    left = len(nums)
    for pos in range(left - 1):
        swapped = False
        for q in range(left - pos - 1):
            if nums[q] > nums[q + 1]:
                swap = nums[q]
                nums[q] = nums[q + 1]
                nums[q + 1] = swap
                swapped = True
        if not swapped:
            break
    return nums


items = [-20, 21, 52, 83, 52, 45, 71, 72]
calc(items)
print(f"{items}")
