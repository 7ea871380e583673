"""Writes data/ieee39.case and the reference power-flow fixture from PYPOWER's case39.

Usage: python3 scripts/make_ieee39.py  (needs the `pypower` package)
"""
import json
import pathlib

from pypower.api import ppoption, runpf
from pypower.case39 import case39

ROOT = pathlib.Path(__file__).resolve().parent.parent

# Classical-model machine data on the 100 MVA base, keyed by terminal bus.
DYNAMIC = {
    39: ("G1", 500.0, 0.006),
    31: ("G2", 30.3, 0.0697),
    32: ("G3", 35.8, 0.0531),
    33: ("G4", 28.6, 0.0436),
    34: ("G5", 26.0, 0.132),
    35: ("G6", 34.8, 0.05),
    36: ("G7", 26.4, 0.049),
    37: ("G8", 24.3, 0.057),
    38: ("G9", 34.5, 0.057),
    30: ("G10", 42.0, 0.031),
}
KIND = {1: "pq", 2: "pv", 3: "slack"}


def main():
    ppc = case39()
    base = float(ppc["baseMVA"])
    case = {"name": "IEEE 39-bus New England", "base_mva": base, "freq_hz": 60.0,
            "buses": [], "branches": [], "generators": []}
    for b in ppc["bus"]:
        case["buses"].append({
            "id": int(b[0]), "kind": KIND[int(b[1])], "v_set": float(b[7]) if int(b[1]) != 1 else 1.0,
            "p_load": b[2] / base, "q_load": b[3] / base,
            "g_shunt": b[4] / base, "b_shunt": b[5] / base,
        })
    for br in ppc["branch"]:
        assert br[9] == 0.0, "phase shifters are not modelled"
        case["branches"].append({
            "from": int(br[0]), "to": int(br[1]), "r": float(br[2]), "x": float(br[3]),
            "b_charging_half": float(br[4]) / 2.0, "tap": float(br[8]) if br[8] != 0 else 1.0,
            "in_service": bool(br[10]),
        })
    gens = []
    for g in ppc["gen"]:
        bus = int(g[0])
        label, h, xdp = DYNAMIC[bus]
        gens.append({"id": label, "bus": bus, "p_set": g[1] / base, "v_set": float(g[5]),
                     "h_sec": h, "xdp": xdp, "d_damp": 2.0})
    case["generators"] = sorted(gens, key=lambda g: int(g["id"][1:]))
    (ROOT / "data" / "ieee39.case").write_text(json.dumps(case, indent=2) + "\n")

    res, ok = runpf(ppc, ppoption(VERBOSE=0, OUT_ALL=0, PF_TOL=1e-12))
    assert ok
    lines = ["bus,v_mag_pu,v_ang_deg"]
    for b in res["bus"]:
        lines.append(f"{int(b[0])},{b[7]:.15g},{b[8]:.15g}")
    (ROOT / "tests" / "fixtures" / "ieee39_reference_pf.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
