"""Two ways to do better than the plain list decoder on length-256 codes.

Freezing the weakest information bits gives a subcode, and running the
decoder on several axis permutations of the received vector gives the
permutation decoder.  Both are compared at a fixed SNR.
"""

from rmlist import build_perm_set, code_params, default_pruning_order
from rmlist.sim import DecoderConfig, SimConfig, sweep


def show(label, p):
    lo, hi = p.wer_ci95
    print(f"  {label:<28} WER {p.wer:.2e}  [{lo:.2e}, {hi:.2e}]  {p.trials} trials")


spec = code_params(8, 3)
mask = default_pruning_order(spec, 15)
print(f"(256,{spec.k}) code, (256,{mask.k_sub}) subcode; frozen leaves:",
      [("".join(map(str, p.bits)), hits) for p, hits in mask.frozen_paths(spec)])

common = dict(snr_points_db=(2.5,), decoder=DecoderConfig("list", L=16), min_word_errors=60, max_trials=6000,
              seed=1)
print("L=16 at 2.5 dB:")
show("full code", sweep(SimConfig(8, 3, **common))[0])
show("subcode, 15 bits frozen", sweep(SimConfig(8, 3, prune=15, **common))[0])

perms = build_perm_set(8, 2)
print(f"\n{{8,2}} uses {len(perms)} representative permutations, e.g.", perms.reps[1].pi)
common = dict(snr_points_db=(2.0,), min_word_errors=60, max_trials=6000, seed=2)
print("list size 32 at 2.0 dB:")
show("list decoder", sweep(SimConfig(8, 2, decoder=DecoderConfig("list", L=32), **common))[0])
show("permutation decoder", sweep(SimConfig(8, 2, decoder=DecoderConfig("perm", l=32), **common))[0])
