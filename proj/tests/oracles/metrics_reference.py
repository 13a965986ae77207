"""Independent NumPy/PyWavelets reference for WQS and MS-SSIM.

The image pairs are closed-form so the C++ tests can rebuild them without a
shared random stream. Prints the reference values for freezing.
"""
import numpy as np
import pywt
from numpy.lib.stride_tricks import sliding_window_view
from skimage.metrics import structural_similarity

N = 32


def pair(kind):
    i, j = np.meshgrid(np.arange(N, dtype=float), np.arange(N, dtype=float), indexing="ij")
    if kind == 0:
        real = 0.5 + 0.4 * np.sin(0.37 * i + 0.11 * j * j / N)
        gen = real + 0.05 * np.cos(1.3 * i - 0.7 * j)
    elif kind == 1:
        smooth = 0.5 + 0.25 * np.cos(0.2 * i) * np.cos(0.3 * j)
        real = smooth + 0.1 * ((i + j) % 2)
        gen = smooth + 0.08 * ((i + j) % 2) + 0.02 * np.sin(0.9 * i * j / N)
    else:
        real = 0.45 + 0.3 * np.sin(0.5 * i) * np.sin(0.45 * j) + 0.1 * np.cos(2.1 * i + 1.7 * j)
        gen = real ** 1.1
    return gen, real


def ssim_valid(a, b, rng, win):
    win = min(win, *a.shape)
    c1, c2 = (0.01 * rng) ** 2, (0.03 * rng) ** 2
    wa = sliding_window_view(a, (win, win))
    wb = sliding_window_view(b, (win, win))
    ma, mb = wa.mean(axis=(-1, -2)), wb.mean(axis=(-1, -2))
    va = wa.var(axis=(-1, -2))
    vb = wb.var(axis=(-1, -2))
    cov = ((wa - ma[..., None, None]) * (wb - mb[..., None, None])).mean(axis=(-1, -2))
    lum = (2 * ma * mb + c1) / (ma**2 + mb**2 + c1)
    cs = (2 * cov + c2) / (va + vb + c2)
    return (lum * cs).mean(), cs.mean()


def wqs(gen, real, depth=3, lam=0.1):
    w = 1.0 / (4 * depth)
    score = 0.0
    g, r = gen, real
    for _ in range(depth):
        gll, gd = pywt.dwt2(g, "haar")
        rll, rd = pywt.dwt2(r, "haar")
        for gs, rs in zip((gll,) + tuple(gd), (rll,) + tuple(rd)):
            rng = rs.max() - rs.min()
            rng = 1.0 if rng == 0 else rng
            s, _ = ssim_valid(gs, rs, rng, 7)
            mse = (((gs - rs) / rng) ** 2).mean()
            score += w * (s - lam * mse)
        g, r = gll, rll
    return min(max(score, 0.0), 1.0)


WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])


def ms_ssim(gen, real):
    m = min(gen.shape)
    k = 1
    while k < 5 and (m >> k) >= 8:
        k += 1
    wts = WEIGHTS[:k] / WEIGHTS[:k].sum()
    out = 1.0
    a, b = gen, real
    for s in range(k):
        ssim, cs = ssim_valid(a, b, 1.0, 7)
        term = ssim if s == k - 1 else cs
        out *= max(term, 0.0) ** wts[s]
        a = a.reshape(a.shape[0] // 2, 2, a.shape[1] // 2, 2).mean(axis=(1, 3))
        b = b.reshape(b.shape[0] // 2, 2, b.shape[1] // 2, 2).mean(axis=(1, 3))
    return out


if __name__ == "__main__":
    # Cross-check the windowed SSIM against scikit-image on an odd window.
    g, r = pair(0)
    ours, _ = ssim_valid(g, r, 1.0, 7)
    sk = structural_similarity(g, r, win_size=7, data_range=1.0, use_sample_covariance=False)
    assert abs(ours - sk) < 1e-12, (ours, sk)
    for kind in range(3):
        g, r = pair(kind)
        print(f"pair {kind}: wqs={wqs(g, r)!r} ms_ssim={ms_ssim(g, r)!r}")
