def calc(arr):
    z = len(arr)
    for k in range(z - 1):
        for w in range(z - k - 1):
            if arr[w] < arr[w + 1]:
                arr[w], arr[w + 1] = arr[w + 1], arr[w]
    return arr


if __name__ == "__main__":
    values = [61, -6, 16, -44, -50, 90]
    calc(values)
    print("result:", values)
