"""Independent oracle implementations used by the test suite.

Everything here deliberately avoids the package's own code paths: losses
are scalar Python loops, gradients come from central finite differences,
the Poisson oracle assembles a dense system, and the multi-scale
similarity reference is a separately written torch route.
"""
from __future__ import annotations

import math

import numpy as np
import torch


def _clamp(p: float, eps: float) -> float:
    return min(max(p, eps), 1.0 - eps)


def oracle_kl(mu_rows, log_var_rows, standard: bool = False) -> float:
    per_sample = []
    for mu_row, lv_row in zip(mu_rows, log_var_rows):
        acc = 0.0
        for mu, lv in zip(mu_row, lv_row):
            acc += mu * mu
            if standard:
                acc += math.exp(lv) - lv - 1.0
            else:
                acc += math.exp(0.5 * lv) - 0.5 * lv - 1.0
        per_sample.append(0.5 * acc)
    return sum(per_sample) / len(per_sample)


def oracle_l1(x, y) -> float:
    xf = np.asarray(x, dtype=np.float64).ravel()
    yf = np.asarray(y, dtype=np.float64).ravel()
    total = 0.0
    for a, b in zip(xf, yf):
        total += abs(a - b)
    return total / xf.size


def oracle_l1_masked(x, y, bg_mask, beta: float) -> float:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    ma = np.asarray(bg_mask, dtype=np.float64)
    n, c, h, w = xa.shape
    total = 0.0
    for b in range(n):
        for ch in range(c):
            for i in range(h):
                for j in range(w):
                    weight = 1.0 - beta * ma[b, 0, i, j]
                    total += weight * abs(xa[b, ch, i, j] - ya[b, ch, i, j])
    return total / (n * c * h * w)


def oracle_disc(real, fakes, eps: float) -> float:
    real_flat = np.asarray(real, dtype=np.float64).ravel()
    loss = 0.0
    acc = 0.0
    for p in real_flat:
        acc += -math.log(_clamp(p, eps))
    loss += acc / real_flat.size
    for fake in fakes:
        fake_flat = np.asarray(fake, dtype=np.float64).ravel()
        acc = 0.0
        for p in fake_flat:
            acc += -math.log(_clamp(1.0 - p, eps))
        loss += acc / fake_flat.size
    return loss


def oracle_gen(fakes, eps: float) -> float:
    loss = 0.0
    for fake in fakes:
        fake_flat = np.asarray(fake, dtype=np.float64).ravel()
        acc = 0.0
        for p in fake_flat:
            acc += -math.log(_clamp(p, eps))
        loss += acc / fake_flat.size
    return loss


def oracle_bce(target_rows, prob_rows, eps: float) -> float:
    per_sample = []
    for t_row, p_row in zip(target_rows, prob_rows):
        acc = 0.0
        for t, p in zip(t_row, p_row):
            pc = _clamp(p, eps)
            acc += -(t * math.log(pc) + (1.0 - t) * math.log(1.0 - pc))
        per_sample.append(acc)
    return sum(per_sample) / len(per_sample)


def directional_derivative(fn, params: list[torch.Tensor], direction: list[torch.Tensor],
                           h: float = 1e-5) -> float:
    """Central finite difference of fn along a direction in parameter space."""
    originals = [p.detach().clone() for p in params]

    def _evaluate(scale: float) -> float:
        with torch.no_grad():
            for p, o, d in zip(params, originals, direction):
                p.copy_(o + scale * d)
        with torch.no_grad():
            value = float(fn())
        return value

    plus = _evaluate(h)
    minus = _evaluate(-h)
    with torch.no_grad():
        for p, o in zip(params, originals):
            p.copy_(o)
    return (plus - minus) / (2.0 * h)


def analytic_directional(fn, params: list[torch.Tensor], direction: list[torch.Tensor]) -> float:
    """Same directional derivative via autograd, for comparison."""
    value = fn()
    grads = torch.autograd.grad(value, params, allow_unused=True)
    total = 0.0
    for g, d in zip(grads, direction):
        if g is not None:
            total += float((g * d).sum())
    return total


def random_direction(params: list[torch.Tensor], gen: torch.Generator) -> list[torch.Tensor]:
    vecs = [torch.randn(p.shape, generator=gen, dtype=p.dtype) for p in params]
    norm = math.sqrt(sum(float((v * v).sum()) for v in vecs))
    return [v / norm for v in vecs]


def reference_msssim_torch(a: np.ndarray, b: np.ndarray, weights) -> float:
    """Multi-scale similarity via torch float64 ops: 11x11 Gaussian valid
    conv, relu'd contrast-structure per level, 2x2 average-pool between
    levels, weighted geometric mean, channel average."""
    k1, k2 = 0.01, 0.03
    c1, c2 = k1 * k1, k2 * k2
    coords = torch.arange(11, dtype=torch.float64) - 5.0
    g = torch.exp(-(coords ** 2) / (2.0 * 1.5 * 1.5))
    g = g / g.sum()
    kernel2d = torch.outer(g, g)

    def _filter(img: torch.Tensor) -> torch.Tensor:
        c = img.shape[1]
        k = kernel2d.expand(c, 1, 11, 11)
        return torch.nn.functional.conv2d(img, k, groups=c)

    def _ssim_cs(x: torch.Tensor, y: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        mu_x, mu_y = _filter(x), _filter(y)
        sxx = _filter(x * x) - mu_x * mu_x
        syy = _filter(y * y) - mu_y * mu_y
        sxy = _filter(x * y) - mu_x * mu_y
        cs_map = (2.0 * sxy + c2) / (sxx + syy + c2)
        lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
        ssim_map = lum * cs_map
        dims = (2, 3)
        return ssim_map.mean(dim=dims), cs_map.mean(dim=dims)

    x = torch.from_numpy(np.asarray(a, dtype=np.float64)).permute(2, 0, 1).unsqueeze(0)
    y = torch.from_numpy(np.asarray(b, dtype=np.float64)).permute(2, 0, 1).unsqueeze(0)
    factors = []
    last_ssim = None
    for level, _ in enumerate(weights):
        ssim_pc, cs_pc = _ssim_cs(x, y)
        last_ssim = ssim_pc
        if level < len(weights) - 1:
            factors.append(torch.relu(cs_pc))
            pad_h, pad_w = x.shape[2] % 2, x.shape[3] % 2
            if pad_h or pad_w:
                x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h), mode="replicate")
                y = torch.nn.functional.pad(y, (0, pad_w, 0, pad_h), mode="replicate")
            x = torch.nn.functional.avg_pool2d(x, 2)
            y = torch.nn.functional.avg_pool2d(y, 2)
    factors.append(torch.relu(last_ssim))
    result = torch.ones_like(factors[0])
    for f, w in zip(factors, weights):
        result = result * f.pow(w)
    return float(result.mean())


def dense_poisson_solve(content: np.ndarray, base: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Direct dense solve of the gradient-domain compositing system.

    Interior pixels are mask==1; the 5-point Laplacian of the output must
    match the content image's Laplacian, with Dirichlet values taken from
    the base image at non-mask pixels.
    """
    h, w = mask.shape
    out = np.asarray(base, dtype=np.float64).copy()
    idx = -np.ones((h, w), dtype=np.int64)
    interior = [(i, j) for i in range(h) for j in range(w) if mask[i, j] > 0.5]
    for n, (i, j) in enumerate(interior):
        idx[i, j] = n
    n_unknown = len(interior)
    if n_unknown == 0:
        return out
    channels = content.shape[2] if content.ndim == 3 else 1
    content3 = content.reshape(h, w, channels)
    base3 = out.reshape(h, w, channels)
    a = np.zeros((n_unknown, n_unknown), dtype=np.float64)
    rhs = np.zeros((n_unknown, channels), dtype=np.float64)
    for n, (i, j) in enumerate(interior):
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = i + di, j + dj
            if not (0 <= ii < h and 0 <= jj < w):
                continue  # off-grid neighbors drop out of the stencil
            a[n, n] += 1.0
            for ch in range(channels):
                rhs[n, ch] += content3[i, j, ch] - content3[ii, jj, ch]
            if idx[ii, jj] >= 0:
                a[n, idx[ii, jj]] = -1.0
            else:
                for ch in range(channels):
                    rhs[n, ch] += base3[ii, jj, ch]
    solution = np.linalg.solve(a, rhs)
    for n, (i, j) in enumerate(interior):
        base3[i, j, :] = solution[n]
    return out
