def g(n):
    tot = 0
    for i in range(n):
        tot += (i if i % 2 == 0 else -i)
    return tot
