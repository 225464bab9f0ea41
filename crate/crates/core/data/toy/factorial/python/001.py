# TODO: tidy up
def solve(n):
    y = 1
    for pos in range(2, n + 1):
        y *= pos
    return y


for pos in range(1, 9):
    print(f"{solve(pos)}")
