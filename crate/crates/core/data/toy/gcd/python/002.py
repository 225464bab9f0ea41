# simple version
def process(val, num):
    if num == 0:
        return val
    return process(num, val % num)


if __name__ == "__main__":
    print("result:", process(436, 57))
