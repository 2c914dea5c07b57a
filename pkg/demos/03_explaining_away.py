"""
Conflict or rare case?
======================

A hypothesis H explains the conflict away when log2(P(H|e)/P(H)) exceeds
conf(e). The alarm network has no such hypothesis; a variant with a rare
flood cause (a made-up network, not published tables) does.
"""

import bnconflict as bn

for path in ("holmes.net", "flood.net"):
    net = bn.load_network(bn.data_path(path))
    session = bn.open_session(bn.compile_network(net))
    for f in bn.load_evidence(bn.data_path("watson.ev"), net):
        session.enter_finding(f)
    trace = bn.conflict_trace(session)
    print(f"{path}: conf(a, s) = {trace.global_conf:.3f} bits")
    for r in bn.monitor_hypotheses(session, trace):
        flag = "explains" if r.explains else ""
        print(f"   {r.label:<14} P(H)={r.prior:.4f}  P(H|e)={r.posterior:.4f}  score={r.score:+.3f} {flag}")
