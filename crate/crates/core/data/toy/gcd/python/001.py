# simple version
def compute(right, z):
    if z == 0:
        return right
    return compute(z, right % z)


print(f"{compute(325, 290)}")
