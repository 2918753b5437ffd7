"""Pure-numpy versions of the compiled kernels. Same algorithms, same outputs."""
import numpy as np


def _rm_strategy(q):
    s = q.sum()
    if s > 0.0:
        return q / s
    return np.full(len(q), 1.0 / len(q))


def rm_plus_symmetric(P, max_iter, tol, check_every):
    """Self-play regret matching+ with linear averaging on a square matrix.

    Returns ``(avg_strategy, residual, iterations)`` where residual is the best
    pure deviation gain against the average, ``max(P x) - x P x``.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    n = P.shape[0]
    q = np.zeros(n)
    avg = np.zeros(n)
    weight = 0.0
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        x = _rm_strategy(q)
        u = P @ x
        q = np.maximum(q + u - x @ u, 0.0)
        avg += it * x
        weight += it
        if it % check_every == 0 or it == max_iter:
            xa = avg / weight
            ua = P @ xa
            residual = float(ua.max() - xa @ ua)
            if residual <= tol:
                break
    return avg / weight, residual, it


def rm_plus_bimatrix(A, max_iter, tol, check_every):
    """Alternating regret matching+ for the zero-sum game A (row maximizes).

    Returns ``(x_avg, y_avg, gap, iterations)`` with the duality gap
    ``max(A y) - min(x A)`` of the averages.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    m, n = A.shape
    qx = np.zeros(m)
    qy = np.zeros(n)
    ax = np.zeros(m)
    ay = np.zeros(n)
    weight = 0.0
    gap = np.inf
    it = 0
    y = _rm_strategy(qy)
    for it in range(1, max_iter + 1):
        x = _rm_strategy(qx)
        ux = A @ y
        qx = np.maximum(qx + ux - x @ ux, 0.0)
        x = _rm_strategy(qx)
        uy = -(x @ A)
        qy = np.maximum(qy + uy - uy @ y, 0.0)
        y = _rm_strategy(qy)
        ax += it * x
        ay += it * y
        weight += it
        if it % check_every == 0 or it == max_iter:
            xa, ya = ax / weight, ay / weight
            gap = float((A @ ya).max() - (xa @ A).min())
            if gap <= tol:
                break
    return ax / weight, ay / weight, gap, it


def fw_simplex_qp(G, b, c, max_iter, gap_tol):
    """Fully-corrective Frank-Wolfe (Wolfe's min-norm point) for
    ``min_w w G w - 2 b w + c`` over the simplex.

    With ``G = V V^T`` and ``b = V x`` this is the squared distance from ``x`` to
    the convex hull of the rows of ``V``. Each major step adds the Frank-Wolfe
    vertex to the active set; minor steps then minimize exactly over the affine
    hull of the active set, backing off to the simplex boundary when needed.
    Returns ``(w, value, major_iterations)``.
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    k = len(b)
    # Gram matrix of the shifted points v_i - x
    H = G - b[:, None] - b[None, :] + c
    w = np.zeros(k)
    first = int(np.argmin(np.diag(H)))
    w[first] = 1.0
    active = [first]
    scale = max(1.0, float(np.abs(H).max()))
    it = 0
    for it in range(1, max_iter + 1):
        Hw = H @ w
        s = int(np.argmin(Hw))
        gap = 2.0 * float(w @ Hw - Hw[s])
        if gap <= gap_tol or s in active:
            break
        active.append(s)
        while True:
            n = len(active)
            M = np.zeros((n + 1, n + 1))
            M[:n, :n] = H[np.ix_(active, active)]
            M[:n, n] = 1.0
            M[n, :n] = 1.0
            rhs = np.zeros(n + 1)
            rhs[n] = 1.0
            try:
                v = np.linalg.solve(M, rhs)[:n]
            except np.linalg.LinAlgError:
                v = None
            if v is None or not np.all(np.isfinite(v)) or np.abs(v).max() * 1e-12 > 1.0 / scale:
                # affinely dependent active set: keep the current iterate
                return _finish(H, w, it)
            if np.all(v > 0.0):
                w[:] = 0.0
                w[active] = v
                break
            wa = w[active]
            neg = v <= 0.0
            theta = np.min(wa[neg] / (wa[neg] - v[neg]))
            wa = wa + theta * (v - wa)
            wa[wa < 1e-15] = 0.0
            w[:] = 0.0
            w[active] = wa
            active = [a for a in active if w[a] > 0.0]
    return _finish(H, w, it)


def _finish(H, w, it):
    value = float(w @ H @ w)
    return w, max(value, 0.0), it
