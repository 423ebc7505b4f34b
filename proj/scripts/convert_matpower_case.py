#!/usr/bin/env python3
"""Convert a MATPOWER distribution case with in-file unit conversions into
a plain per-unit case that carries only the bus/gen/branch tables.

Usage: convert_matpower_case.py SRC.m DST.m [--ohms-kw] [--pf PF] [--drop-open]

--ohms-kw  branch r/x given in ohms and loads in kW/kVAr (divide r,x by
           Vbase^2/Sbase, loads by 1e3)
--pf PF    rewrite loads as Pd*PF, Pd*sin(acos(PF)) after unit conversion
"""
import argparse
import math
import re
import sys


def read_table(text, name):
    m = re.search(r"mpc\.%s\s*=\s*\[(.*?)\];" % name, text, re.S)
    if not m:
        sys.exit("missing table " + name)
    rows = []
    for line in m.group(1).splitlines():
        line = line.split("%")[0].strip().rstrip(";").strip()
        if line:
            rows.append([float(t) for t in line.split()])
    return rows


def fmt(v):
    return repr(int(v)) if float(v).is_integer() else "%.12g" % v


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("src")
    ap.add_argument("dst")
    ap.add_argument("--ohms-kw", action="store_true")
    ap.add_argument("--pf", type=float)
    ap.add_argument("--drop-open", action="store_true", help="omit out-of-service branches (open tie switches)")
    a = ap.parse_args()
    text = open(a.src).read()
    base = float(re.search(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)", text).group(1))
    bus = read_table(text, "bus")
    gen = read_table(text, "gen")
    branch = read_table(text, "branch")
    if a.drop_open:
        branch = [r for r in branch if len(r) < 11 or r[10] != 0]
    if a.ohms_kw:
        zbase = (bus[0][9] * 1e3) ** 2 / (base * 1e6)
        for br in branch:
            br[2] /= zbase
            br[3] /= zbase
        for b in bus:
            b[2] /= 1e3
            b[3] /= 1e3
    if a.pf:
        for b in bus:
            pd = b[2]
            b[3] = pd * math.sin(math.acos(a.pf))
            b[2] = pd * a.pf
    name = a.dst.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    out = ["function mpc = %s" % name,
           "%% Converted from MATPOWER %s (per-unit r/x, MW/MVAr loads)." % a.src.rsplit("/", 1)[-1],
           "%% MATPOWER data files are distributed under the 3-clause BSD license.",
           "mpc.version = '2';",
           "mpc.baseMVA = %s;" % fmt(base), "",
           "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin",
           "mpc.bus = ["]
    out += ["\t" + "\t".join(fmt(v) for v in r[:13]) + ";" for r in bus]
    out += ["];", "", "%% bus Pg Qg Qmax Qmin Vg mBase status", "mpc.gen = ["]
    out += ["\t" + "\t".join(fmt(v) for v in r[:8]) + ";" for r in gen]
    out += ["];", "", "%% fbus tbus r x b rateA rateB rateC ratio angle status", "mpc.branch = ["]
    out += ["\t" + "\t".join(fmt(v) for v in r[:11]) + ";" for r in branch]
    out += ["];", ""]
    open(a.dst, "w").write("\n".join(out))


if __name__ == "__main__":
    main()
