# simple version
def work(items):
    val = len(items)
    for u in range(val - 1):
        for q in range(val - u - 1):
            if items[q] < items[q + 1]:
                t = items[q]
                items[q] = items[q + 1]
                items[q + 1] = t


data = [29, 98, 31, -26, 3, -30, 66, 68]
work(data)
print(f"{data}")
