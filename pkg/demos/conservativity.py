"""Compare two rule sets: bounded homomorphisms exist at every size, a full one does not."""

from tgdconserve import Budget, chase, find_hom, hom_exists_n, parse_database, parse_rules
from tgdconserve.chase import null_components
from tgdconserve.frontier import check_cq_conservative, check_hom_conservative

T1 = parse_rules("A(x) -> exists y. S(x,y), B(y).\nB(x) -> exists y. R(x,y), B(y).")
T2 = parse_rules("A(x) -> exists y. S(x,y), B(y).\nB(x) -> exists y. R(y,x), B(y).")
D = parse_database("A(c).")

print("T2 builds an R-chain pointing back to c's successor, T1 one pointing away.")
for n in range(1, 7):
    src = chase(D, T2, Budget(n + 3)).instance
    tgt = chase(D, T1, Budget(n + 5)).instance
    print(f"  n={n}: every {n}-constant piece of the T2 chase maps into the T1 chase: {hom_exists_n(src, tgt, ['R'], n).value.value}")

r1, r2 = chase(D, T1, Budget(8)), chase(D, T2, Budget(8))
(comp,) = null_components(r2, ["R"], D)
s1 = next(f.args[1] for f in r1.instance.sorted_facts() if f.rel == "S")
s2 = next(f.args[1] for f in r2.instance.sorted_facts() if f.rel == "S")
print("  whole R-component, anchored at the S-successor:", find_hom(comp, r1.instance, ["R"], pins={s2: s1}))

print("hom-conservativity:", check_hom_conservative(T1, T2, ["A"], ["R"]).to_json())
v = check_cq_conservative(T1, T2, ["A"], ["R"], Budget(hom_n=6))
print("CQ-conservativity:", v.value.value, "evidence:", [e["components"] for e in v.witness if e["database"] == ["A(c)"]])
