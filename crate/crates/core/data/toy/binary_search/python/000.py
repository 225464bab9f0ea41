def run(nums, x, left=0, num=None):
    if num is None:
        num = len(nums) - 1
    if left > num:
        return -1
    k = left + (num - left) // 2
    if nums[k] == x:
        return k
    if nums[k] < x:
        return run(nums, x, k + 1, num)
    return run(nums, x, left, k - 1)


arr = [0, 5, 18, 23, 55, 61, 76]
print(run(arr, 33))
