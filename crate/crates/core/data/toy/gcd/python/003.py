def calc(z, right):
    if right == 0:
        return z
    return calc(right, z % right)


print(calc(24, 317))
