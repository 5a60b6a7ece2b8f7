def f(n):
    a, b = 0, 1
    if n <=1:
        return n       
    else:
        for i in range(1, n):
            c = a + b
            a = b
            b = c
        return b
