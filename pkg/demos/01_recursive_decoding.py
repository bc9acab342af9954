"""A tour of the recursive structure: encode a block, add noise, decode it.

Run with ``python demos/01_recursive_decoding.py``.
"""
import numpy as np

from rmlist import ChannelModel, code_params, decode_basic, decode_list, encode, posteriors, transmit
from rmlist.sim import ml_bruteforce

rng = np.random.default_rng(2024)

# {7,2}: length 128, 29 information bits, distance 32
spec = code_params(7, 2)
print(f"RM({spec.m},{spec.r}): n={spec.n} k={spec.k} d={spec.d}, {len(spec.paths)} leaves")
for p in spec.paths[:4]:
    print("  path", "".join(map(str, p.bits)), "kind", p.kind, "width", p.info_width)

# the codeword of an information block, as +-1 symbols
info = rng.integers(0, 2, spec.k, dtype=np.uint8)
c = encode(spec, None, info)

# BPSK over AWGN at 2 dB per information bit, then posterior differences
channel = ChannelModel.awgn_ebn0(2.0, spec.rate)
y = posteriors(transmit(c, channel, rng), channel)
print("hard-decision symbol errors:", int(np.sum(np.sign(y) != c)))

basic = decode_basic(spec, None, y)
lst = decode_list(spec, None, y, L=16)
print("basic  ok:", np.array_equal(basic.best_info, info), "flops", basic.flops)
print("list16 ok:", np.array_equal(lst.best_info, info), "flops", lst.flops)
print("top of the list (log posterior):", [round(r.log_cost, 3) for r in lst.list[:4]])

# a small code can be checked against exhaustive search
small = code_params(4, 2)
y = posteriors(transmit(encode(small, None, rng.integers(0, 2, small.k)), ChannelModel.awgn(1.0), rng),
               ChannelModel.awgn(1.0))
full = decode_list(small, None, y, L=2**small.k, branch=0)
ref_info, _, ref_cost = ml_bruteforce(small, None, y)
print("{4,2} exhaustive list == brute force:", np.array_equal(full.best_info, ref_info),
      f"({full.best_log_cost:.6f} vs {ref_cost:.6f})")
