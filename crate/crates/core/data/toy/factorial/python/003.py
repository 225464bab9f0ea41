# quick check
def go(left):
    z = 1
    for k in range(2, left + 1):
        z *= k
    return z


if __name__ == "__main__":
    for k in range(1, 5):
        print(go(k))
