"""Branch expansions at onset: numerical Lyapunov-Schmidt vs closed forms.

Near the bifurcation point M*(k0) = 4g + 4k0^2 the branch of patterns
expands as M(s) = M*(k0) + Mdot0*s + (Mddot0/2)*s^2 + ...  On the square
lattice the first derivative vanishes and the curvature is negative (a
subcritical pitchfork); on the hexagonal lattice the resonant triad makes
the bifurcation transcritical with positive slope.  The toolkit computes
the coefficients by a numerical reduction with exact derivative tensors;
this script compares them with the closed forms.
"""

from thinfilm import closed_form_coefficients, expansion_coefficients, make_lattice

print(f"{'lattice':<8} {'g':>4} {'k0':>4} {'numerical':>24} {'closed form':>24} {'rel err':>10}")
for kind in ("square", "hexagon"):
    for g in (0.5, 1.0, 2.0):
        for k0 in (0.5, 1.0, 2.0):
            lat = make_lattice(kind, k0, 64)
            num = expansion_coefficients(lat, g, 1)
            ref = closed_form_coefficients(kind, g, k0)
            a = num[1] if kind == "square" else num[0]
            b = ref[1] if kind == "square" else ref[0]
            rel = abs(a - b) / abs(b)
            label = "Mddot0" if kind == "square" else "Mdot0"
            print(f"{kind:<8} {g:>4.1f} {k0:>4.1f} {label}={a:>+17.10f} "
                  f"{b:>+24.10f} {rel:>10.2e}")

print()
print("named values at g = 1, k0 = 1:")
print(f"  square  Mddot0 = {closed_form_coefficients('square', 1, 1)[1]:+.6f}")
print(f"  hexagon Mdot0  = {closed_form_coefficients('hexagon', 1, 1)[0]:+.6f}")
