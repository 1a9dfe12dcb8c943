"""Reference Kodaira types at the prime over 2, computed with PARI/GP.

Writes crates/core/tests/data/pari_kodaira.tsv. Each line holds a field
descriptor, a curve in this crate's syntax, PARI's Kodaira symbol and the
valuation of the minimal discriminant. Requires cypari2.
"""

import random
import sys

import cypari2

pari = cypari2.Pari()

# descriptor, absolute polynomial pieces, local name of each generator
FIELDS = [
    ('mixed(k=1,eis="z-2")', None, None),
    ('mixed(k=1,eis="z^2-2")', None, "x^2-2"),
    ('mixed(k=1,eis="z^3-2")', None, "x^3-2"),
    ('mixed(k=1,eis="z^2-2*z+2")', None, "x^2-2*x+2"),
    ('mixed(k=1,eis="z^2+2")', None, "x^2+2"),
    ('mixed(k=2,eis="z-2")', "x^2+x+1", None),
    ('mixed(k=2,eis="z^2-2")', "x^2+x+1", "x^2-2"),
]


def kodaira(code):
    code = int(code)
    if code == 1:
        return "I0"
    if code in (2, 3, 4):
        return ["II", "III", "IV"][code - 2]
    if code > 4:
        return f"I{code - 4}"
    if code == -1:
        return "I*0"
    if code in (-2, -3, -4):
        return ["II*", "III*", "IV*"][-code - 2]
    return f"I*{-code - 4}"


def setup(gpol, ppol):
    polys = [p for p in (gpol, ppol) if p]
    if not polys:
        return pari.nfinit("y-1"), pari("1"), pari("2")
    absolute = pari(polys[0]).subst("x", "y")
    if len(polys) == 2:
        absolute = pari.polcompositum(polys[0], polys[1])[0].subst("x", "y")
    nf = pari.nfinit(absolute)
    roots = [pari.nfroots(nf, pari(p))[0] if p else None for p in (gpol, ppol)]
    g = roots[0] if gpol else pari("1")
    pi = roots[1] if ppol else pari("2")
    return nf, g, pi


def term(rng):
    c = rng.choice([0, 0, 1, -1, 2, 3, -2, 4, 5, -6, 8, 12, -16])
    return c


def main(out):
    rng = random.Random(20240501)
    lines = []
    for desc, gpol, ppol in FIELDS:
        nf, g, pi = setup(gpol, ppol)
        pr = pari.idealprimedec(nf, 2)
        assert len(pr) == 1, desc
        pr = pr[0]
        gsym = "g" if gpol else None
        psym = "pi" if ppol else None
        count = 0
        while count < 60:
            texts, vals = [], []
            deep = count % 3 != 0
            for weight in (1, 2, 3, 4, 6):
                monos = [("1", pari("1"))]
                if gsym:
                    monos.append(("g", g))
                if psym:
                    monos.append(("pi", pi))
                if gsym and psym:
                    monos.append(("g*pi", g * pi))
                parts, val = [], pari("0")
                for name, v in monos:
                    c = term(rng)
                    if c:
                        parts.append(str(c) if name == "1" else f"{c}*{name}")
                        val += c * v
                text = "+".join(parts).replace("+-", "-") or "0"
                shift = rng.randint(0, weight + 1) if deep else 0
                if shift and val != 0:
                    text = f"({text})*pi^{shift}"
                    val *= pi**shift
                texts.append(text)
                vals.append(val)
            try:
                e = pari.ellinit(vals, nf)
            except cypari2.PariError:
                continue
            if not e or pari.nfeltval(nf, e[11], pr) > 40:
                continue
            red = pari.elllocalred(e, pr)
            u = red[2][0]
            vmin = int(pari.nfeltval(nf, e[11], pr)) - 12 * int(pari.nfeltval(nf, u, pr))
            lines.append(f"{desc}\t[{','.join(texts)}]\t{kodaira(red[1])}\t{vmin}")
            count += 1
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data/pari_kodaira.tsv")
