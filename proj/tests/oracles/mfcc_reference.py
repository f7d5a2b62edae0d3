"""Independent numpy MFCC reference used to freeze frontend test values."""
import numpy as np

SR, WIN, HOP, NFFT, NMEL, NCOEF = 16000, 480, 160, 512, 40, 40
LO, HI = 20.0, 4000.0


def mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def imel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def filterbank():
    pts = imel(np.linspace(mel(LO), mel(HI), NMEL + 2))
    freqs = np.arange(NFFT // 2 + 1) * SR / NFFT
    fb = np.zeros((NMEL, freqs.size))
    for m in range(NMEL):
        lo, c, hi = pts[m], pts[m + 1], pts[m + 2]
        up = (freqs - lo) / (c - lo)
        down = (hi - freqs) / (hi - c)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def dct_ortho(n):
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    d = np.cos(np.pi * k * (2 * i + 1) / (2 * n)) * np.sqrt(2.0 / n)
    d[0] /= np.sqrt(2.0)
    return d


def mfcc(x):
    x = np.asarray(x, dtype=np.float64)
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - 0.97 * x[:-1]
    T = 1 + (len(y) - WIN) // HOP
    win = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(WIN) / (WIN - 1))
    fb, D = filterbank(), dct_ortho(NMEL)
    out = np.zeros((T, NCOEF))
    for t in range(T):
        fr = np.zeros(NFFT)
        fr[:WIN] = y[t * HOP:t * HOP + WIN] * win
        p = np.abs(np.fft.rfft(fr)) ** 2
        out[t] = (D @ np.log(np.maximum(fb @ p, 1e-10)))[:NCOEF]
    return out


if __name__ == "__main__":
    n = np.arange(SR)
    sine = 0.5 * np.sin(2 * np.pi * 440.0 * n / SR).astype(np.float32)
    f = mfcc(sine)
    interior = f[2:-2]
    ratio = interior.std(axis=0) / np.abs(interior.mean(axis=0))
    print("shape", f.shape)
    print("max std/|mean| ratio", ratio.max(), "argmax", ratio.argmax())
    print("first frame c0..c4", f[10, :5])
