"""Reference operation tables for GF(9) and GF(8) in symbol form."""

F9_SYMBOLS = "0 1 2 u v w x y z".split()
F9_ADD = """
0 1 2 u v w x y z
1 2 0 v w u y z x
2 0 1 w u v z x y
u v w x y z 0 1 2
v w u y z x 1 2 0
w u v z x y 2 0 1
x y z 0 1 2 u v w
y z x 1 2 0 v w u
z x y 2 0 1 w u v
"""
F9_MUL = """
0 0 0 0 0 0 0 0 0
0 1 2 u v w x y z
0 2 1 x z y u w v
0 u x 2 w z 1 v y
0 v z w x 1 y 2 u
0 w y z 1 u v x 2
0 x u 1 y v 2 z w
0 y w v 2 x z u 1
0 z v y u 2 w 1 x
"""
# negation column as given; the entry for 2 is inconsistent with F9_ADD (2 + 1 = 0)
F9_NEG = "0 2 0 x z y u w v".split()
F9_X = {"1", "x", "2", "u"}
F9_X_PRIME = {"v", "y", "z", "w"}
F9_PRIMITIVE = {"v", "w", "y", "z"}

F8_SYMBOLS = "0 1 u v w x y z".split()
F8_ADD = """
0 1 u v w x y z
1 0 v u x w z y
u v 0 1 y z w x
v u 1 0 z y x w
w x y z 0 1 u v
x w z y 1 0 v u
y z w x u v 0 1
z y x w v u 1 0
"""
F8_MUL = """
0 0 0 0 0 0 0 0
0 1 u v w x y z
0 u w y x z 1 v
0 v y x 1 u z w
0 w x 1 z v u y
0 x z u v y w 1
0 y 1 z u w v x
0 z v w y 1 x u
"""
F8_NEG = "0 1 u v w x y z".split()


def parse(symbols, text):
    idx = {s: i for i, s in enumerate(symbols)}
    return [[idx[s] for s in line.split()] for line in text.strip().splitlines()]
