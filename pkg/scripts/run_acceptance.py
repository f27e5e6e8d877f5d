#!/usr/bin/env python3
"""Run every verification suite and print one line per check.

Equivalent to `padiclf verify <suite>` over all suites; exits nonzero if
anything fails.  The full battery takes a few minutes on a laptop.
"""

import sys
import time

from padiclf.verify import SUITES, run_suite


def main() -> int:
    failed = total = 0
    t0 = time.time()
    for name in sorted(SUITES):
        t = time.time()
        for check, passed, detail in run_suite(name):
            total += 1
            status = "PASS" if passed else "FAIL"
            line = f"[{name}] {status} {check}"
            if detail:
                line += f" -- {detail}"
            print(line)
            if not passed:
                failed += 1
        print(f"[{name}] done in {time.time() - t:.1f}s")
    print(f"{total - failed}/{total} checks passed in {time.time() - t0:.1f}s")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
