"""Independent reference for the seeded PRNG stream.

Prints the first 16 raw xoshiro256++ outputs for seed 0 and seed 42
(state expanded with splitmix64) plus the first uniform doubles.
"""
M = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & M
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return x, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


def stream(seed, n):
    s = []
    x = seed
    for _ in range(4):
        x, v = splitmix64(x)
        s.append(v)
    out = []
    for _ in range(n):
        r = (rotl((s[0] + s[3]) & M, 23) + s[0]) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        out.append(r)
    return out


if __name__ == "__main__":
    for seed in (0, 42):
        vals = stream(seed, 16)
        print(f"seed {seed}:")
        for v in vals:
            print(f"  0x{v:016X}ULL,")
        print("  uniform:", [repr((v >> 11) * 2.0**-53) for v in vals[:4]])
