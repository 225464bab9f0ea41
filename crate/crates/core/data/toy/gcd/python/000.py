# iterative
def helper(num, x):
    if x == 0:
        return num
    return helper(x, num % x)


if __name__ == "__main__":
    print(helper(9, 478))
