"""SVG cross-sections of bodies, hats and osculating circles."""

import math

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InvalidInputError  # noqa: E402
from .sphere import direction_net, tangent_basis  # noqa: E402

plt.rcParams.update({"svg.hashsalt": "hatlab", "svg.fonttype": "none", "font.size": 9})


def section_frame(K, x=None, e1=None, e2=None):
    """Origin and orthonormal pair spanning the plotted 2-plane."""
    d = K.dim
    x = np.zeros(d) if x is None else np.asarray(x, dtype=float)
    if e1 is None:
        e1 = np.eye(d)[0]
    if e2 is None:
        e2 = np.eye(d)[-1] if d > 1 else None
    return x, np.asarray(e1, float), np.asarray(e2, float)


def body_outline(K, frame, n=720):
    """Boundary of the planar section, as touching points in 2D or by radial bisection in 3D."""
    x0, e1, e2 = frame
    if K.dim == 2:
        U = direction_net(2, n, include_axes=False)
        return K._touching(U)
    # section through x0: bisect along rays from an interior point of the section
    c = x0 + 0.0
    ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    W = np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2
    lo, hi = np.zeros(n), np.full(n, 2.0 * K.diameter() + 1.0)
    if K.level(c[None, :])[0] > 0:
        c = K._touching(-e2[None, :])[0] + 1e-3 * K.diameter() * e2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        inside = K.level(c + mid[:, None] * W) <= 0
        lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
    return c + lo[:, None] * W


def cap_outline(cap, frame, reach=3.0, n=400):
    """Section of the hat boundary: the cap arc and its tangent rays."""
    x0, e1, e2 = frame
    proj = lambda P: np.column_stack([(P - x0) @ e1, (P - x0) @ e2])  # noqa: E731
    c, u, eps, beta = cap.center, cap.axis, cap.eps, cap.beta
    a2 = e1 - np.dot(e1, u) * u
    if np.linalg.norm(a2) < 1e-12:
        a2 = e2 - np.dot(e2, u) * u
    a2 /= np.linalg.norm(a2)
    t = np.linspace(-beta, beta, n)
    arc = c + eps * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * a2)
    rays = []
    for s in (-1, 1):
        p = c + eps * (math.cos(beta) * u + s * math.sin(beta) * a2)
        tang = -math.sin(beta) * u + s * math.cos(beta) * a2
        rays.append(np.array([p, p + reach * eps * tang]))
    return proj(arc), [proj(r) for r in rays]


def plot_section(path, K, caps=(), circles=(), frame=None, title=None, others=()):
    """Write an SVG with the body section, hats, circles (center, radius) and
    outlines of further bodies."""
    frame = frame or section_frame(K)
    x0, e1, e2 = frame
    if abs(np.dot(e1, e1) - 1) > 1e-9 or abs(np.dot(e2, e2) - 1) > 1e-9 or abs(np.dot(e1, e2)) > 1e-9:
        raise InvalidInputError("plot frame needs an orthonormal pair")
    fig, ax = plt.subplots(figsize=(5, 5))
    P = body_outline(K, frame)
    Q = np.column_stack([(P - x0) @ e1, (P - x0) @ e2])
    ax.fill(Q[:, 0], Q[:, 1], color="0.85", ec="0.2", lw=1.0, label="body")
    for k, L in enumerate(others):
        R = body_outline(L, frame)
        R = np.column_stack([(R - x0) @ e1, (R - x0) @ e2])
        ax.plot(np.r_[R[:, 0], R[:1, 0]], np.r_[R[:, 1], R[:1, 1]], color=f"C{k + 4}", lw=0.9, label=f"body {k + 2}")
    for k, cap in enumerate(caps):
        arc, rays = cap_outline(cap, frame, reach=2.0)
        ax.plot(arc[:, 0], arc[:, 1], color=f"C{k}", lw=1.2, label=f"hat eps={cap.eps:.3g} delta={cap.delta:.3g}")
        for r in rays:
            ax.plot(r[:, 0], r[:, 1], color=f"C{k}", lw=0.8, ls="--")
    for k, (c, r) in enumerate(circles):
        c = np.asarray(c, dtype=float)
        cc = ((c - x0) @ e1, (c - x0) @ e2)
        ax.add_patch(plt.Circle(cc, r, fill=False, color="C3", lw=0.6, alpha=0.8))
    ax.set_aspect("equal")
    lim = 0.6 * K.diameter() + 0.2
    cx, cy = Q.mean(axis=0)
    ax.set_xlim(cx - lim, cx + lim)
    ax.set_ylim(cy - lim, cy + lim)
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def curvature_circles(est, k=4):
    """Osculating circles at a few of the finest scales of each direction."""
    out = []
    for rec in est.records:
        for r in rec.radii[-k:]:
            if np.isfinite(r):
                out.append((est.x + r * est.nu, float(r)))
    return out


def frame_for_normal(x, nu, tau=None):
    nu = np.asarray(nu, float)
    tau = tangent_basis(nu)[0] if tau is None else np.asarray(tau, float)
    return np.asarray(x, float), tau, nu
