"""
The command line
================

Every analysis is also available as ``transversal <command> <map>``.  The
report is JSON and identical on reruns.  The exit code says whether the
rank was full (0), deficient (1), the input bad (2) or the rank uncertifiable (3).
"""

import json

from transversal.cli import main

for argv in (["relations", "fig1", "--pretty"],
             ["certify", "chebyshev2"],
             ["certify", "lattes:a=2"],
             ["pushforward", "chebyshev3", "--relation", "1,1,1,1"]):
    print("$ transversal", " ".join(argv))
    code = main(argv)
    print("exit code", code, "\n")

spec = json.dumps({"numerator": [[0.25, 0], [0, 0], [1, 0]]})
main(["analyze", spec, "--horizon", "6", "--pretty"])
