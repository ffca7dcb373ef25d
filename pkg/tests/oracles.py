"""Frozen oracle values; regenerate with the scripts in scripts/."""

# scripts/oracle_excursion.py: mesh 2^14, 10^5 draws, exact bridge minimum
EXCURSION_ORACLE = {
    "mesh": 16384,
    "samples": 100_000,
    "seed": 20261016,
    "mean": 0.6268983607563074,
    "se": 0.0004883670318407758,
    "cbrt": 0.8502546737222173,
    "cbrt_se": 0.0002181640734047681,
    "second": 0.4168515519954846,
    "second_se": 0.0006729545215084903,
}

# scripts/oracle_tails.py: Laplace, s = 0, t = 1, n = 2^12, 10^7 first cycles
TAIL_ORACLE = {
    "n": 4096,
    "reps": 10_000_000,
    "seed": 20261016,
    "value": 1.129568,
    "stderr": 0.0026648907694946148,
    "rel_error": 0.0010535757298208992,
}
