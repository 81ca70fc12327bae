"""Rivers, Conway functions and the chain homomorphism that detects a defect."""

from tgdconserve import Budget
from tgdconserve.conway import (
    QUERY_SCHEMA,
    ConwaySpec,
    RiverSpec,
    conway_stops,
    gen_guarded_T0,
    has_defect,
    myth_chain_spec,
    river_build,
    river_correctness,
    river_witness_db,
)
from tgdconserve.chase import chase
from tgdconserve.hom import infinite_chain_hom
from tgdconserve.model import Atom

s = ConwaySpec(6, (1, 1, 3, 1, 1, 1), (1, 1, 2, 3, 1, 1), reduction=True)
print("trajectory from 2:", conway_stops(s).certificate["trajectory"])

for k in (RiverSpec((2, 3, 1), (3, 1, 1)), RiverSpec((2, 3, 1), (3, 3, 1))):
    chk = river_correctness(k, s)
    v = infinite_chain_hom(myth_chain_spec(k), river_build(k), QUERY_SCHEMA)
    print(f"{k}: locally correct {chk.locally_correct}, correct {chk.correct}, defect {has_defect(k)}, myth maps back {v.value.value}")

t0, sd, sq = gen_guarded_T0(s)
k = RiverSpec((2, 3, 1), (3, 1, 1))
db = river_witness_db(s, k)
res = chase(db, t0, Budget(12))
print(f"guarded rules: {len(t0)}; witness database: {len(db)} facts")
print("Encounter derived:", Atom("Encounter", ("b3", "b2")) in res.instance)
print("myth chase maps into the witness:", infinite_chain_hom(myth_chain_spec(k), db, sq).value.value)
