"""Window substitutions and their Perron frequency data.

For a primitive substitution S, the words of length m occurring in the
subshift themselves evolve under a derived substitution S_m whose abundance
matrix M_m has the same Perron eigenvalue theta as S. The normalized Perron
vector of M_m lists the frequencies of length-m words; these frequencies,
divided by powers of theta, generate the group of possible gap labels.

This script prints M_2, theta, letter and pair frequencies for three
classical substitutions, and verifies the prefix factorization
M_m(S^p) = R P, M_2(S^p) = P R that rebuilds longer-window frequency data
from pair data (here m = 3, so triple frequencies come from pairs).
"""
import numpy as np

from gaplab import Substitution, derive_substitution, perron, prefix_factorization

SYSTEMS = {
    "fibonacci": Substitution({"0": "01", "1": "0"}),
    "thue-morse": Substitution({"0": "01", "1": "10"}),
    "period-doubling": Substitution({"0": "01", "1": "00"}),
}


def main():
    for name, sub in SYSTEMS.items():
        derived = derive_substitution(sub, 2)
        letters = perron(sub.matrix())
        pairs = perron(derived.matrix)
        print(f"== {name} ==")
        print(f"rules: {sub.rules}")
        print(f"length-2 words: {derived.words}")
        print("M_2 =")
        print(np.array(derived.matrix))
        print(f"theta = {letters.theta:.12f} (letters) vs {pairs.theta:.12f} (pairs)")
        print(f"letter frequencies: {np.round(letters.vector, 10)}")
        print(f"pair frequencies:   {np.round(pairs.vector, 10)}")

        triples = perron(derive_substitution(sub, 3).matrix)
        rebuild, project, power = prefix_factorization(sub, 3)
        recovered = rebuild @ pairs.vector / pairs.theta**power
        print(f"factorization power p = {power}; triple frequencies rebuilt from pairs match: "
              f"{np.allclose(recovered, triples.vector, atol=1e-10)}")
        print()


if __name__ == "__main__":
    main()
