"""Reference implementation of the float raster loops.

Buffers are flat row-major ``array.array`` objects: cell (i, j) lives at
j * nx + i, with x growing along i and y along j. Phase k at a point is
ax[k] * x + ay[k] * y + const[k].
"""

from math import exp


def argmax_grid(ax, ay, const, x0, dx, y0, dy, nx, ny, out_index, out_gap):
    """Dominant phase per cell centre and its lead over the runner-up."""
    n = len(ax)
    for j in range(ny):
        y = y0 + (j + 0.5) * dy
        base = [ay[k] * y + const[k] for k in range(n)]
        for i in range(nx):
            x = x0 + (i + 0.5) * dx
            best = second = -float("inf")
            arg = 0
            for k in range(n):
                v = ax[k] * x + base[k]
                if v > best:
                    second = best
                    best = v
                    arg = k
                elif v > second:
                    second = v
            out_index[j * nx + i] = arg
            out_gap[j * nx + i] = best - second if n > 1 else float("inf")


def exact_u_grid(ax, ay, const, weight_sign, x0, dx, y0, dy, nx, ny, inv_hbar, out_u):
    """2 sum_{k<l} (ax_l - ax_k)^2 w_k w_l / (sum w)^2 with w = sign * exp((theta - max) / hbar).

    Writes NaN where the weighted sum is not positive.
    """
    n = len(ax)
    w = [0.0] * n
    for j in range(ny):
        y = y0 + (j + 0.5) * dy
        for i in range(nx):
            x = x0 + (i + 0.5) * dx
            top = -float("inf")
            for k in range(n):
                v = ax[k] * x + ay[k] * y + const[k]
                w[k] = v
                if v > top:
                    top = v
            total = 0.0
            for k in range(n):
                w[k] = weight_sign[k] * exp((w[k] - top) * inv_hbar)
                total += w[k]
            if total <= 0.0:
                out_u[j * nx + i] = float("nan")
                continue
            acc = 0.0
            for k in range(n):
                for l in range(k + 1, n):
                    d = ax[l] - ax[k]
                    acc += d * d * w[k] * w[l]
            out_u[j * nx + i] = 2.0 * acc / (total * total)
