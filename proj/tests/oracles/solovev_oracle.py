"""Independent symbolic oracle for the Solovev flux jet.

Builds the up-down asymmetric Cerfon-Freidberg polynomial basis with sympy,
differentiates symbolically and prints reference values that are frozen
into tests/test_flux.cpp.
"""
import sympy as sp

x, y = sp.symbols("x y", positive=True)
L = sp.log(x)
A = sp.Rational(0)
c = [sp.Float(s, 30) for s in """0.07350114445500399706 -0.08662417436317227513
-0.14639315434011026207 -0.07631237100536276213 0.09031790113794227394
-0.09157541239018724584 -0.003892282979837564482 0.04271891225076417603
0.22755456460027913117 -0.13047241360177695448 -0.03006974108476955225
0.004212671892103931173""".split()]
basis = [
    sp.Integer(1), x**2, y**2 - x**2 * L, x**4 - 4 * x**2 * y**2,
    2 * y**4 - 9 * y**2 * x**2 + 3 * x**4 * L - 12 * x**2 * y**2 * L,
    x**6 - 12 * x**4 * y**2 + 8 * x**2 * y**4,
    8 * y**6 - 140 * y**4 * x**2 + 75 * y**2 * x**4 - 15 * x**6 * L
    + 180 * x**4 * y**2 * L - 120 * x**2 * y**4 * L,
    y, y * x**2, y**3 - 3 * y * x**2 * L, 3 * y * x**4 - 4 * y**3 * x**2,
    8 * y**5 - 45 * y * x**4 - 80 * y**3 * x**2 * L + 60 * y * x**4 * L,
]
P = x**4 / 8 + A * (x**2 * L / 2 - x**4 / 8) + sum(ci * b for ci, b in zip(c, basis))
R0 = sp.Float("547.891714877869", 30)
amp = R0
R, Z = sp.symbols("R Z", positive=True)
psi = amp * P.subs({x: R / R0, y: Z / R0})
jet = [psi, sp.diff(psi, R), sp.diff(psi, Z), sp.diff(psi, R, 2), sp.diff(psi, R, Z), sp.diff(psi, Z, 2)]
pts = [(R0, 0), (R0 + 100, 50), (400, -250), (700, 300)]
for p in pts:
    vals = [sp.N(j.subs({R: p[0], Z: p[1]}), 20) for j in jet]
    print(p, ["%.17e" % float(v) for v in vals])
gs = sp.simplify(sp.diff(psi, R, 2) - sp.diff(psi, R) / R + sp.diff(psi, Z, 2))
print("GS operator:", sp.nsimplify(sp.expand(gs), rational=False))
