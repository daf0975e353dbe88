"""Pure-Python collapsed-Gibbs sweep, used when the extension is not built."""


def sweep(word, doc, z, n_dt, n_tw, n_t, alpha, beta, uniforms):
    """Resample every token once, in array order, updating counts in place.

    Same signature and arithmetic as the compiled kernel.  The numpy arrays
    are copied to lists for the loop and written back at the end.
    """
    n_tokens = len(z)
    if len(uniforms) < n_tokens:
        raise ValueError("need one uniform per token")
    K = len(n_t)
    vbeta = n_tw.shape[1] * beta
    words = word.tolist()
    docs = doc.tolist()
    zs = z.tolist()
    dt = n_dt.tolist()
    tw = n_tw.tolist()
    nt = n_t.tolist()
    us = uniforms.tolist()
    topics = range(K)
    cum = [0.0] * K
    for i in range(n_tokens):
        row = dt[docs[i]]
        w = words[i]
        old = zs[i]
        row[old] -= 1
        tw[old][w] -= 1
        nt[old] -= 1
        total = 0.0
        for t in topics:
            total = total + (row[t] + alpha) * (tw[t][w] + beta) / (nt[t] + vbeta)
            cum[t] = total
        u = us[i] * total
        new = K - 1
        for t in topics:
            if u < cum[t]:
                new = t
                break
        zs[i] = new
        row[new] += 1
        tw[new][w] += 1
        nt[new] += 1
    z[:] = zs
    n_dt[:] = dt
    n_tw[:] = tw
    n_t[:] = nt
