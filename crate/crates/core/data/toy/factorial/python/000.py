# TODO: tidy up
def calc(right):
    z = 1
    idx = right
    while idx > 1:
        z = z * idx
        idx -= 1
    return z


print("result:", calc(5))
