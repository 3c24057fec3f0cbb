"""Reference models written independently of the simulator, used as test oracles."""
from __future__ import annotations

from fractions import Fraction
from itertools import product

# ---------------------------------------------------------------- graphs


def floyd_diameter(nodes, edges) -> int:
    """All-pairs shortest paths by Floyd-Warshall; returns the hop diameter."""
    idx = {n: i for i, n in enumerate(nodes)}
    k = len(nodes)
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(k)] for i in range(k)]
    for a, b in edges:
        d[idx[a]][idx[b]] = 1
        d[idx[b]][idx[a]] = 1
    for m in range(k):
        for i in range(k):
            for j in range(k):
                if d[i][m] + d[m][j] < d[i][j]:
                    d[i][j] = d[i][m] + d[m][j]
    return int(max(max(row) for row in d))


# ---------------------------------------------------------------- glossy


def glossy_line_reach(n_nodes: int, prr: Fraction, n_tx: int, max_waves: int) -> dict:
    """Exact reach probability of every node of a line ``0-1-...-(n-1)`` flooded from 0.

    Walks the full outcome tree of per-wave receptions: the initiator sends
    in waves 0, 2, 4, ..., a node first decoding in wave w relays in
    w+1, w+3, ..., each up to ``n_tx`` times. On a line no listener ever
    hears two senders at once, so every reception is a single Bernoulli(prr).
    """
    reach = {i: Fraction(0) for i in range(n_nodes)}

    def sends(start, w):
        return w >= start and (w - start) % 2 == 0 and (w - start) // 2 < n_tx

    def walk(w, first, prob):
        if w == max_waves:
            for node in first:
                reach[node] += prob
            return
        tx = {n for n, s in first.items() if sends(s, w)}
        listeners = sorted(
            {m for n in tx for m in (n - 1, n + 1) if 0 <= m < n_nodes} - set(first)
        )
        for hits in product((True, False), repeat=len(listeners)):
            p = prob
            nxt = dict(first)
            for node, ok in zip(listeners, hits):
                p *= prr if ok else 1 - prr
                if ok:
                    nxt[node] = w + 1
            if p:
                walk(w + 1, nxt, p)

    walk(0, {0: 0}, Fraction(1))
    return reach


# ---------------------------------------------------------------- XPC


YES, NO, ACK, HAVE, ABORT_ECHO = 0x01, 0x02, 0x03, 0x04, 0x0F
VOTE_REQ, PRE, COMMIT, ABORT = 0x11, 0x12, 0x13, 0x1F

_HOST_PHASES = {
    "2pc": (("votes", VOTE_REQ), ("have", COMMIT)),
    "3pc": (("votes", VOTE_REQ), ("acks", PRE), ("have", COMMIT)),
}


def _participant_step(proto, st, msg, vote):
    """Classical participant table: (state, message) -> (state, reply)."""
    if st == "commit":
        return "commit", HAVE
    if st == "abort":
        return "abort", ABORT_ECHO
    if proto == "3pc" and st == "pre":
        if msg == COMMIT:
            return "commit", HAVE
        if msg == ABORT:
            return "abort", ABORT_ECHO
        return "pre", ACK
    if msg == VOTE_REQ:
        return "voted", vote
    if msg == PRE:
        return "pre", ACK
    if msg == COMMIT:
        return "commit", HAVE
    return "abort", ABORT_ECHO


def _participant_timeout(proto, st):
    if st in ("commit", "abort"):
        return st
    if proto == "3pc" and st == "pre":
        return "commit"
    return "abort"


class XpcOracle:
    """Small-state model of one XPC transaction driven by explicit loss patterns.

    State is an immutable tuple so it can be memoised. Participants are
    numbered 1..n and the host is node 0.
    """

    def __init__(self, proto: str, n: int, retx: int, votes: dict):
        self.proto, self.n, self.retx = proto, n, retx
        self.votes = votes
        self.cohort = tuple(range(1, n + 1))

    def initial(self):
        host = (0, "run", False, 0, ())  # phase index, status, timed_out, retr, replies
        parts = tuple(("init", 0, False, None) for _ in self.cohort)
        return (host, parts, VOTE_REQ, self.cohort, False)

    def round_patterns(self, state):
        """Every (control_received, delivered) pair for the next round."""
        sched = state[3]
        opts = []
        for node in self.cohort:
            choices = [(False, False), (True, False)]
            if node in sched:
                choices.append((True, True))
            opts.append(choices)
        for combo in product(*opts):
            ctrl = frozenset(n for n, (c, _) in zip(self.cohort, combo) if c)
            ok = frozenset(n for n, (_, d) in zip(self.cohort, combo) if d)
            yield ctrl, ok

    def step(self, state, ctrl, delivered):
        host, parts, msg, sched, finished = state
        assert not finished
        parts = list(parts)
        for i, node in enumerate(self.cohort):
            if node not in ctrl:
                continue
            st, retr, timed, reply = parts[i]
            retr += 1
            if retr > self.retx:
                t = _participant_timeout(self.proto, st)
                if t != st:
                    st, timed = t, True
            prev = st
            st, reply = _participant_step(self.proto, st, msg, self.votes[node])
            if st != prev:
                retr = 0
            parts[i] = (st, retr, timed, reply)
        if not sched:
            return (host, tuple(parts), msg, sched, True)

        phase, status, timed, retr, replies = host
        got = dict(replies)
        for i, node in enumerate(self.cohort):
            if node in sched and node in delivered and node in ctrl and node not in got:
                got[node] = parts[i][3]
        retr += 1
        phases = _HOST_PHASES[self.proto]
        if retr > self.retx:
            status, timed = "abort", True
        elif len(got) == self.n:
            name = phases[phase][0]
            want = {"votes": YES, "acks": ACK}.get(name)
            if want is not None and any(r != want for r in got.values()):
                status = "abort"
            elif phase + 1 < len(phases):
                phase += 1
            else:
                status = "done"
            got, retr = {}, 0
        if status == "abort":
            msg, sched = ABORT, ()
        elif status == "done":
            msg, sched = COMMIT, ()
        else:
            msg = phases[phase][1]
            sched = tuple(n for n in self.cohort if n not in got)
        host = (phase, status, timed, retr, tuple(sorted(got.items())))
        return (host, tuple(parts), msg, sched, False)

    def decisions(self, state):
        host, parts, _, _, _ = state
        out = {}
        status, timed = host[1], host[2]
        if status == "done":
            out[0] = "committed"
        else:
            out[0] = "timeout_aborted" if timed else "aborted"
        for node, (st, _, t, _) in zip(self.cohort, parts):
            if st not in ("commit", "abort"):
                st, t = _participant_timeout(self.proto, st), True
            base = "committed" if st == "commit" else "aborted"
            out[node] = f"timeout_{base}" if t else base
        return out

    @staticmethod
    def label(decisions) -> str:
        ds = list(decisions.values())
        if any(d.startswith("timeout") for d in ds):
            return "timeout"
        if all(d == "committed" for d in ds):
            return "commit"
        if all(d == "aborted" for d in ds):
            return "abort"
        return "mixed"
