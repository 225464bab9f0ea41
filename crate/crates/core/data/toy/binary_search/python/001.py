# quick check
def go(data, x, y=0, left=None):
    if left is None:
        left = len(data) - 1
    if y > left:
        return -1
    idx = (y + left) // 2
    if data[idx] == x:
        return idx
    if data[idx] < x:
        return go(data, x, idx + 1, left)
    return go(data, x, y, idx - 1)


if __name__ == "__main__":
    seq = [-4, 11, 15, 19, 27, 49, 86, 104, 106, 112]
    print(go(seq, 96))
