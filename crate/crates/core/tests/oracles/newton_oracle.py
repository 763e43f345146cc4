"""Reference Newton corrections p_k(z)/p_k'(z) by plain recurrence at 200 digits."""
import mpmath as mp

mp.mp.dps = 200


def mandelbrot(k, z):
    p, d = mp.mpc(1), mp.mpc(0)
    for _ in range(k):
        p, d = z * p * p + 1, p * p + 2 * z * p * d
    return p / d


def quadratic(k, c, z):
    f, d = z, mp.mpc(1)
    for _ in range(k):
        f, d = f * f + c, 2 * f * d
    return (f - z) / (d - 1)


def show(label, v):
    print(f"{label}: {mp.nstr(v.real, 20)} {mp.nstr(v.imag, 20)}")


show("mandelbrot k=40 z=2.5", mandelbrot(40, mp.mpc(2.5)))
show("mandelbrot k=12 z=0.3+0.4i", mandelbrot(12, mp.mpc("0.3", "0.4")))
show("mandelbrot k=20 z=-1.9+0.01i", mandelbrot(20, mp.mpc("-1.9", "0.01")))
show("mandelbrot k=30 z=-0.75+0.1i", mandelbrot(30, mp.mpc("-0.75", "0.1")))
show("quad c=i k=5 z=0.3+0.2i", quadratic(5, mp.mpc(0, 1), mp.mpc("0.3", "0.2")))
show("quad c=-1 k=30 z=3", quadratic(30, mp.mpc(-1), mp.mpc(3)))
show("quad c=2 k=8 z=0.1-0.7i", quadratic(8, mp.mpc(2), mp.mpc("0.1", "-0.7")))
for r in mp.polyroots([1, 2, 1, 1], maxsteps=200, extraprec=200):
    show("cubic root", r)
