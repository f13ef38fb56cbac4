"""Smoke test for the htlocate Python extension.

Build and run from the repository root:

    cargo build --release -p htlocate-py --features extension-module
    cp target/release/libhtlocate_py.so python/htlocate.so
    python3 python/smoke_test.py
"""

import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

import htlocate  # noqa: E402

BENCH = os.path.join(HERE, "..", "benchmarks", "c17_renumbered.bench")


def main():
    c17 = htlocate.Netlist.load(BENCH)
    assert c17.name == "c17", c17.name
    assert len(c17.inputs) == 5 and len(c17.outputs) == 2 and len(c17.gates) == 6
    assert len(c17.internal_nets()) == 6
    assert htlocate.Netlist.parse(c17.to_bench()).to_bench() == c17.to_bench()

    report = htlocate.localize(c17, k=2)
    assert report.triggers == ["N8->N11#7", "N9->N12#9"], report.triggers
    assert report.payload == "N12->N13#12", report.payload
    assert report.filtered == ["N9->N10#8"]
    assert report.to_dict()["payload"]["net"] == "N12->N13#12"

    inst = htlocate.inject_explicit(c17, ["N8->N11", "N9->N12"], "N12->N13", "and")
    assert inst.kind == "explicit" and inst.trigger_gate == "HTT"
    assert len(inst.infected.gates) == 8
    counts = htlocate.score(report, inst)
    assert counts["tp_t"] == 2 and counts["tp_p"] == 1, counts

    imp = htlocate.inject_implicit(c17, "N8", "N9", "N13")
    assert ("N13", "NAND", ["N10", "N12", "N9"]) in imp.infected.gates

    try:
        htlocate.inject_implicit(c17, "N11", "N12", "N13")
    except ValueError as e:
        assert "back-edge" in str(e)
    else:
        raise AssertionError("back-edge accepted")

    corpus = htlocate.generate_corpus(c17, 5, seed=3, policy="random")
    again = htlocate.generate_corpus(c17, 5, seed=3, policy="random")
    assert [i.infected.to_bench() for i in corpus] == [i.infected.to_bench() for i in again]

    stats = dict((net, (p, t)) for net, p, t in htlocate.signal_probabilities(c17))
    assert stats["N8"] == (0.75, 0.375)

    print("smoke test ok:", report)


if __name__ == "__main__":
    main()
