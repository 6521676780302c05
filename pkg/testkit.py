"""
Script runner for the test modules: runs every test_* function of a module
and prints a summary in the same style as the command-line reports.
"""

import time
import traceback
from typing import Dict


def run_all(namespace: Dict, title: str, verbose: bool = False) -> bool:
    tests = [(name, fn) for name, fn in namespace.items()
             if name.startswith("test_") and callable(fn)]
    print(f"🧪 {title}")
    print("=" * 50)
    failed = 0
    start = time.perf_counter()
    for name, fn in tests:
        try:
            fn()
            print(f"✅ {name}")
        except Exception as e:
            failed += 1
            print(f"❌ {name}: {type(e).__name__}: {e}")
            if verbose:
                traceback.print_exc()
    print("=" * 50)
    print(f"📊 {len(tests) - failed}/{len(tests)} passed in {time.perf_counter() - start:.1f}s")
    return failed == 0
