"""Regenerate the golden wire-protocol suite in golden/.

The suite pins a small deterministic LM artifact plus request/response pairs
for every endpoint; the Python remote-client tests and the scorer service's
tests both replay it. Output is deterministic, so reruns are no-ops.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hinfill.fixture import build_planted_fixture
from hinfill.lm import train_builtin_lm
from hinfill.verbalize import build_infill_template

OUT = os.path.join(os.path.dirname(__file__), "..", "golden")


def main() -> None:
    hin, _ = build_planted_fixture()
    lm = train_builtin_lm(hin, order=2, smoothing=0.1, dim=8, epochs=1, seed=1)
    os.makedirs(os.path.join(OUT, "wire"), exist_ok=True)
    lm.save(os.path.join(OUT, "lm.json"))

    cases = []

    def case(name, method, endpoint, request, response):
        cases.append({"name": name, "method": method, "endpoint": endpoint,
                      "request": request, "response": response})

    case("info", "GET", "/v1/info", None,
         {"embedding_dim": lm.embedding_dim, "capabilities": ["score", "fill", "embed"]})

    score_seqs = [
        ["iron", "fatigue"],
        ["iron", "fatigue", "treated", "by", "zorvexil"],
        ["xaladine", "targets", "krxa"],
        ["ashen", "drift", "similar", "to", "pallid", "drift"],
        ["zorvexil"],
        ["totally", "unseen", "tokens"],
    ]
    for i, seq in enumerate(score_seqs):
        case(f"score_{i}", "POST", "/v1/score", {"tokens": seq},
             {"log_prob": lm.score(tuple(seq))})

    for i, seq in enumerate([["zorvexil"], ["iron", "fatigue"], ["mystery", "name"]]):
        case(f"embed_{i}", "POST", "/v1/embed", {"tokens": seq},
             {"vector": [float(x) for x in lm.embed(tuple(seq))]})

    template = build_infill_template(("iron", "fatigue"), ("zorvexil",), 2)
    candidates = [["quandrol"], ["xaladine"], ["krxa"], ["pallid", "drift"], ["molvurin"]]
    for i, k in enumerate((2, 5)):
        fills = lm.fill(template, 0, [tuple(c) for c in candidates], k)
        case(f"fill_{i}", "POST", "/v1/fill",
             {"template": template.to_json(), "mask_position": 0,
              "candidates": candidates, "k": k},
             {"fills": [{"tokens": list(f.tokens), "log_score": f.log_score} for f in fills]})

    partial = template.substitute(0, ("treated", "by"))
    fills = lm.fill(partial, 0, [("quandrol",), ("krxa",), ("night", "tremor")], 3)
    case("fill_after_substitution", "POST", "/v1/fill",
         {"template": partial.to_json(), "mask_position": 0,
          "candidates": [["quandrol"], ["krxa"], ["night", "tremor"]], "k": 3},
         {"fills": [{"tokens": list(f.tokens), "log_score": f.log_score} for f in fills]})

    with open(os.path.join(OUT, "wire", "cases.json"), "w", encoding="utf-8") as f:
        json.dump(cases, f, indent=1, sort_keys=True)
    print(f"wrote {len(cases)} golden cases and lm.json under {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()
