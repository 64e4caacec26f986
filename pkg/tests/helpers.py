"""Shared test fixtures: a BETH-style raw event table builder."""
import numpy as np
import pandas as pd


def make_raw(n=40, seed=0):
    """BETH-style raw event table with labels."""
    rng = np.random.default_rng(seed)
    args = []
    for _ in range(n):
        count = rng.integers(0, 4)
        args.append(str([{"name": f"a{i}", "type": "int", "value": int(rng.integers(5))}
                         for i in range(count)]))
    return pd.DataFrame({
        "timestamp": np.arange(n) * 0.1,
        "processId": rng.choice([0, 1, 2, 7, 4033], size=n),
        "threadId": rng.choice([7021, 7022, 8100], size=n),
        "parentProcessId": rng.choice([0, 1, 2, 6501], size=n),
        "userId": rng.choice([0, 500, 1001, 4000], size=n),
        "mountNamespace": rng.choice([4026531840, 4026532243], size=n),
        "processName": rng.choice(["ps", "sshd", "systemd"], size=n),
        "hostName": ["ip-10-100"] * n,
        "eventId": rng.choice([3, 42, 157], size=n),
        "eventName": ["openat"] * n,
        "stackAddresses": ["[]"] * n,
        "argsNum": rng.integers(0, 5, size=n),
        "returnValue": rng.choice([-2, 0, 3], size=n),
        "args": args,
        "sus": rng.choice([0, 1], size=n, p=[0.9, 0.1]),
    })
