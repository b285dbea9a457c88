"""VQE on the bundled 2-qubit Hamiltonian under four initializations.

Each method (three tuned score variants plus the fixed manual baseline)
draws its starting angles, then the same gradient-descent training runs
from each start. The table shows how fast each one closes the gap to
the exact ground energy.
"""
from pathlib import Path

from qinitopt.cli import cmd_vqe, resolve_config

here = Path(__file__).resolve().parent.parent
cfg = resolve_config(
    "vqe",
    overrides=(f"hamiltonian={here / 'hamiltonians' / 'toy_2q.txt'}",
               "es.n_iters=15"),
    seed=0)
record = cmd_vqe(cfg)

results = record["results"]
print(f"exact ground energy: {results['exact_ground_energy']:.6f}")
print(f"\n{'method':>8} {'alpha':>8} {'beta':>8} {'E(0)':>9} "
      f"{'E(50)':>9} {'E(100)':>9} {'gap':>10}")
for method, entry in results["methods"].items():
    a, b = entry["hyperparams"]
    curve = entry["curve"]
    print(f"{method:>8} {a:8.4f} {b:8.4f} {curve[0]:9.5f} "
          f"{curve[50]:9.5f} {curve[100]:9.5f} {entry['gap']:10.2e}")
