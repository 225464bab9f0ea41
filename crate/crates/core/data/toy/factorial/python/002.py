# TODO: tidy up
def solve(y):
    n = 1
    k = y
    while k > 1:
        n = n * k
        k -= 1
    return n


if __name__ == "__main__":
    for k in range(1, 8):
        print("result:", solve(k))
