"""How the list size trades operations for word error rate on {7,2}.

A few thousand trials per point, so it finishes in seconds; the numbers are
rough.  The full-scale operating point lives in the ``table1_rm72`` recipe.
"""
from rmlist.sim import DecoderConfig, SimConfig, sweep

snr = 2.5
print(f"{{7,2}} at {snr} dB per information bit")
print(f"{'L':>4} {'WER':>9} {'95% CI':>22} {'ML lower bound':>15} {'flops':>9}")
for L in (1, 2, 4, 8, 16):
    cfg = SimConfig(7, 2, (snr,), DecoderConfig("list", L=L), min_word_errors=50, max_trials=20_000, seed=3)
    p, = sweep(cfg)
    lo, hi = p.wer_ci95
    print(f"{L:>4} {p.wer:>9.2e} [{lo:.2e}, {hi:.2e}] {p.ml_lb_wer:>15.2e} {p.mean_flops:>9.0f}")

# as L grows the decoder WER approaches the ML lower bound, at roughly L-fold cost
