#!/usr/bin/env python3
"""Author the desk20 corpus and its replay fixtures.

Writes corpus/desk20.jsonl (20 tasks, each with a check() test suite and a
500 ms timeout) and fixtures/desk20.jsonl (replay entries for k=5 samples per
task). The per-sample verdict plan below is the ground truth for the expected
report counts; the script refuses to write anything if the plan totals drift
from the frozen expectation, if a canonical solution fails its own checks, or
if a wrong-answer variant fails to raise AssertionError.

Run from the repository root:  python tools/make_desk20.py
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from dco.config import RuntimeConfig  # noqa: E402
from dco.eval_harness import EvalTask, task_directive  # noqa: E402
from dco.llm_client import compute_request_key  # noqa: E402
from dco.prompt_builder import build_request, build_system_prompt  # noqa: E402

K = 5
TIMEOUT_MS = 500

# Verdict plan: one row per task, one letter per sample.
#   P pass, E extraction failure, C compile error, M missing entry point,
#   D disallowed import, T timeout, F test failure
PLAN = [
    ("t01", "PPECF"),
    ("t02", "PEPTE"),
    ("t03", "PCPEP"),
    ("t04", "EPCFP"),
    ("t05", "PPCPE"),
    ("t06", "PMPPE"),
    ("t07", "PPEFF"),
    ("t08", "DPDPE"),
    ("t09", "PPTPC"),
    ("t10", "PEPPM"),
    ("t11", "CPPEP"),
    ("t12", "PPDPF"),
    ("t13", "PTPPE"),
    ("t14", "PPPCF"),
    ("t15", "MPPFP"),
    ("t16", "PPCEF"),
    ("t17", "DPPTP"),
    ("t18", "PCPFM"),
    ("t19", "EPDPC"),
    ("t20", "PFTEM"),
]

EXPECTED_TOTALS = {"P": 50, "E": 15, "C": 10, "M": 5, "D": 5, "T": 5, "F": 10}

TASKS = [
    {
        "task_id": "t01", "entry_point": "add",
        "prompt": 'def add(a, b):\n    """Return the sum of a and b."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(2, 3) == 5\n"
                 "    assert candidate(-1, 1) == 0\n"
                 "    assert candidate(0, 0) == 0\n",
        "solution": "def add(a, b):\n    return a + b\n",
        "wrong": "def add(a, b):\n    return a - b\n",
    },
    {
        "task_id": "t02", "entry_point": "subtract",
        "prompt": 'def subtract(a, b):\n    """Return a minus b."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(5, 3) == 2\n"
                 "    assert candidate(3, 5) == -2\n"
                 "    assert candidate(0, 0) == 0\n",
        "solution": "def subtract(a, b):\n    return a - b\n",
        "wrong": "def subtract(a, b):\n    return a + b\n",
    },
    {
        "task_id": "t03", "entry_point": "multiply",
        "prompt": 'def multiply(a, b):\n    """Return the product of a and b."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(3, 4) == 12\n"
                 "    assert candidate(-2, 5) == -10\n"
                 "    assert candidate(7, 0) == 0\n",
        "solution": "def multiply(a, b):\n    return a * b\n",
        "wrong": "def multiply(a, b):\n    return a * b + 1\n",
    },
    {
        "task_id": "t04", "entry_point": "reverse_string",
        "prompt": 'def reverse_string(s):\n    """Return s with its characters in reverse order."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate('abc') == 'cba'\n"
                 "    assert candidate('') == ''\n"
                 "    assert candidate('ab') == 'ba'\n",
        "solution": "def reverse_string(s):\n    return s[::-1]\n",
        "wrong": "def reverse_string(s):\n    return s\n",
    },
    {
        "task_id": "t05", "entry_point": "is_palindrome",
        "prompt": 'def is_palindrome(s):\n    """Return True when s reads the same forwards and backwards."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate('level')\n"
                 "    assert not candidate('abc')\n"
                 "    assert candidate('')\n",
        "solution": "def is_palindrome(s):\n    return s == s[::-1]\n",
        "wrong": "def is_palindrome(s):\n    return True\n",
    },
    {
        "task_id": "t06", "entry_point": "factorial",
        "prompt": 'def factorial(n):\n    """Return n! for a non-negative integer n."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(0) == 1\n"
                 "    assert candidate(1) == 1\n"
                 "    assert candidate(5) == 120\n",
        "solution": "def factorial(n):\n"
                    "    result = 1\n"
                    "    for i in range(2, n + 1):\n"
                    "        result *= i\n"
                    "    return result\n",
        "wrong": "def factorial(n):\n"
                 "    result = 0\n"
                 "    for i in range(2, n + 1):\n"
                 "        result *= i\n"
                 "    return result\n",
    },
    {
        "task_id": "t07", "entry_point": "fibonacci",
        "prompt": 'def fibonacci(n):\n    """Return the nth Fibonacci number, with fibonacci(0) == 0."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(0) == 0\n"
                 "    assert candidate(1) == 1\n"
                 "    assert candidate(10) == 55\n",
        "solution": "def fibonacci(n):\n"
                    "    a, b = 0, 1\n"
                    "    for _ in range(n):\n"
                    "        a, b = b, a + b\n"
                    "    return a\n",
        "wrong": "def fibonacci(n):\n    return n\n",
    },
    {
        "task_id": "t08", "entry_point": "is_prime",
        "prompt": 'def is_prime(n):\n    """Return True when n is a prime number."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(2)\n"
                 "    assert candidate(13)\n"
                 "    assert not candidate(1)\n"
                 "    assert not candidate(9)\n",
        "solution": "def is_prime(n):\n"
                    "    if n < 2:\n"
                    "        return False\n"
                    "    i = 2\n"
                    "    while i * i <= n:\n"
                    "        if n % i == 0:\n"
                    "            return False\n"
                    "        i += 1\n"
                    "    return True\n",
        "wrong": "def is_prime(n):\n    return n % 2 == 1\n",
    },
    {
        "task_id": "t09", "entry_point": "gcd",
        "prompt": 'def gcd(a, b):\n    """Return the greatest common divisor of two positive integers."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(12, 18) == 6\n"
                 "    assert candidate(7, 13) == 1\n"
                 "    assert candidate(10, 10) == 10\n",
        "solution": "def gcd(a, b):\n"
                    "    while b:\n"
                    "        a, b = b, a % b\n"
                    "    return a\n",
        "wrong": "def gcd(a, b):\n    return min(a, b)\n",
    },
    {
        "task_id": "t10", "entry_point": "list_max",
        "prompt": 'def list_max(xs):\n    """Return the largest element of a non-empty list."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate([1, 5, 3]) == 5\n"
                 "    assert candidate([-2, -7]) == -2\n"
                 "    assert candidate([4]) == 4\n",
        "solution": "def list_max(xs):\n"
                    "    best = xs[0]\n"
                    "    for x in xs[1:]:\n"
                    "        if x > best:\n"
                    "            best = x\n"
                    "    return best\n",
        "wrong": "def list_max(xs):\n    return xs[0]\n",
    },
    {
        "task_id": "t11", "entry_point": "list_sum",
        "prompt": 'def list_sum(xs):\n    """Return the sum of all elements of xs."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate([1, 2, 3]) == 6\n"
                 "    assert candidate([]) == 0\n"
                 "    assert candidate([-1, 1]) == 0\n",
        "solution": "def list_sum(xs):\n"
                    "    total = 0\n"
                    "    for x in xs:\n"
                    "        total += x\n"
                    "    return total\n",
        "wrong": "def list_sum(xs):\n"
                 "    total = 0\n"
                 "    for x in xs[:-1]:\n"
                 "        total += x\n"
                 "    return total\n",
    },
    {
        "task_id": "t12", "entry_point": "count_vowels",
        "prompt": 'def count_vowels(s):\n    """Return how many vowels (aeiou, either case) appear in s."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate('AeIoU xyz') == 5\n"
                 "    assert candidate('rhythm') == 0\n"
                 "    assert candidate('') == 0\n",
        "solution": "def count_vowels(s):\n"
                    "    return sum(1 for ch in s.lower() if ch in 'aeiou')\n",
        "wrong": "def count_vowels(s):\n"
                 "    return sum(1 for ch in s if ch in 'aeiou')\n",
    },
    {
        "task_id": "t13", "entry_point": "unique_sorted",
        "prompt": 'def unique_sorted(xs):\n    """Return the distinct elements of xs in ascending order."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate([3, 1, 3, 2]) == [1, 2, 3]\n"
                 "    assert candidate([]) == []\n"
                 "    assert candidate([5, 5]) == [5]\n",
        "solution": "def unique_sorted(xs):\n    return sorted(set(xs))\n",
        "wrong": "def unique_sorted(xs):\n    return sorted(xs)\n",
    },
    {
        "task_id": "t14", "entry_point": "clamp",
        "prompt": 'def clamp(x, lo, hi):\n    """Return x limited to the inclusive range [lo, hi]."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate(5, 0, 10) == 5\n"
                 "    assert candidate(-3, 0, 10) == 0\n"
                 "    assert candidate(42, 0, 10) == 10\n",
        "solution": "def clamp(x, lo, hi):\n    return min(max(x, lo), hi)\n",
        "wrong": "def clamp(x, lo, hi):\n    return x\n",
    },
    {
        "task_id": "t15", "entry_point": "word_count",
        "prompt": 'def word_count(s):\n    """Return the number of whitespace-separated words in s."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate('one two three') == 3\n"
                 "    assert candidate('a  b') == 2\n"
                 "    assert candidate('') == 0\n",
        "solution": "def word_count(s):\n    return len(s.split())\n",
        "wrong": "def word_count(s):\n    return len(s.split(' '))\n",
    },
    {
        "task_id": "t16", "entry_point": "running_total",
        "prompt": 'def running_total(xs):\n    """Return the list of prefix sums of xs."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate([1, 2, 3]) == [1, 3, 6]\n"
                 "    assert candidate([]) == []\n"
                 "    assert candidate([5]) == [5]\n",
        "solution": "def running_total(xs):\n"
                    "    totals = []\n"
                    "    acc = 0\n"
                    "    for x in xs:\n"
                    "        acc += x\n"
                    "        totals.append(acc)\n"
                    "    return totals\n",
        "wrong": "def running_total(xs):\n"
                 "    totals = []\n"
                 "    acc = 0\n"
                 "    for x in xs:\n"
                 "        acc += x\n"
                 "        totals.append(acc)\n"
                 "    return totals[1:]\n",
    },
    {
        "task_id": "t17", "entry_point": "median",
        "prompt": 'def median(xs):\n    """Return the median of a non-empty list (mean of the middle two when even)."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate([3, 1, 2]) == 2\n"
                 "    assert candidate([4, 1, 3, 2]) == 2.5\n"
                 "    assert candidate([7]) == 7\n",
        "solution": "def median(xs):\n"
                    "    ordered = sorted(xs)\n"
                    "    mid = len(ordered) // 2\n"
                    "    if len(ordered) % 2:\n"
                    "        return ordered[mid]\n"
                    "    return (ordered[mid - 1] + ordered[mid]) / 2\n",
        "wrong": "def median(xs):\n    return xs[len(xs) // 2]\n",
    },
    {
        "task_id": "t18", "entry_point": "title_case",
        "prompt": 'def title_case(s):\n    """Return s with each whitespace-separated word capitalized."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate('hello world') == 'Hello World'\n"
                 "    assert candidate('a') == 'A'\n"
                 "    assert candidate('') == ''\n",
        "solution": "def title_case(s):\n"
                    "    return ' '.join(w.capitalize() for w in s.split(' ')) if s else ''\n",
        "wrong": "def title_case(s):\n    return s.upper()\n",
    },
    {
        "task_id": "t19", "entry_point": "second_largest",
        "prompt": 'def second_largest(xs):\n    """Return the second largest distinct value in xs."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate([1, 2, 3]) == 2\n"
                 "    assert candidate([3, 3, 2]) == 2\n"
                 "    assert candidate([10, 4]) == 4\n",
        "solution": "def second_largest(xs):\n    return sorted(set(xs))[-2]\n",
        "wrong": "def second_largest(xs):\n    return sorted(xs)[-2]\n",
    },
    {
        "task_id": "t20", "entry_point": "balanced_brackets",
        "prompt": 'def balanced_brackets(s):\n    """Return True when every (), [], {} in s nests and closes correctly."""\n',
        "tests": "def check(candidate):\n"
                 "    assert candidate('([]{})')\n"
                 "    assert not candidate('([)]')\n"
                 "    assert not candidate('(')\n"
                 "    assert candidate('')\n",
        "solution": "def balanced_brackets(s):\n"
                    "    pairs = {')': '(', ']': '[', '}': '{'}\n"
                    "    stack = []\n"
                    "    for ch in s:\n"
                    "        if ch in '([{':\n"
                    "            stack.append(ch)\n"
                    "        elif ch in pairs:\n"
                    "            if not stack or stack.pop() != pairs[ch]:\n"
                    "                return False\n"
                    "    return not stack\n",
        "wrong": "def balanced_brackets(s):\n"
                 "    return s.count('(') == s.count(')')\n",
    },
]


def rename_entry_point(source: str, entry_point: str) -> str:
    # Wrong-name variant: same body, different function name.
    return source.replace(f"def {entry_point}(", f"def {entry_point}_impl(", 1)


def prose_reply(index: int) -> str:
    variants = [
        "I'm sorry, I can only describe the approach in words here. First sort "
        "the input, then walk it once while tracking the best value seen so far.",
        "```python\ndef half_finished(xs):\n    # the reply was cut off before the closing fence",
        "",
        "The function you want would iterate over the input and accumulate a "
        "result, but I cannot provide source code for this request.",
        "Sure! The idea is to use a loop. Let me know if you would like an "
        "implementation in a specific language.",
    ]
    return variants[index % len(variants)]


def reply_for(task: dict, letter: str, task_index: int, sample_index: int) -> str:
    ep = task["entry_point"]
    if letter == "P":
        body = task["solution"]
    elif letter == "F":
        body = task["wrong"]
    elif letter == "C":
        body = f"def {ep}(:\n    return\n"
    elif letter == "M":
        body = rename_entry_point(task["solution"], ep)
    elif letter == "D":
        if task_index % 2:
            body = "import requests\n" + task["solution"]
        else:
            head, rest = task["solution"].split("\n", 1)
            body = head + "\n    import requests\n" + rest
    elif letter == "T":
        body = f"def {ep}(*args):\n    while True:\n        pass\n"
    elif letter == "E":
        return prose_reply(task_index + sample_index)
    else:
        raise ValueError(f"unknown plan letter {letter!r}")
    if task_index % 2 == 0:
        return json.dumps({"code": body})
    return f"Sure, here you go:\n```python\n{body}```\nHope this helps."


def verify_tasks() -> None:
    for task in TASKS:
        namespace: dict = {}
        exec(task["tests"], namespace)
        check = namespace["check"]
        good: dict = {}
        exec(task["solution"], good)
        check(good[task["entry_point"]])  # must not raise
        bad: dict = {}
        exec(task["wrong"], bad)
        try:
            check(bad[task["entry_point"]])
        except AssertionError:
            pass
        else:
            raise SystemExit(f"{task['task_id']}: wrong variant passed its checks")


def main() -> None:
    plan_totals = Counter("".join(row for _, row in PLAN))
    if plan_totals != Counter(EXPECTED_TOTALS):
        raise SystemExit(f"plan totals {dict(plan_totals)} != expected {EXPECTED_TOTALS}")
    if [task_id for task_id, _ in PLAN] != [t["task_id"] for t in TASKS]:
        raise SystemExit("plan rows and task list disagree")
    verify_tasks()

    corpus_path = REPO / "corpus" / "desk20.jsonl"
    fixtures_path = REPO / "fixtures" / "desk20.jsonl"
    corpus_path.parent.mkdir(exist_ok=True)
    fixtures_path.parent.mkdir(exist_ok=True)

    config = RuntimeConfig(response_contract="json_envelope")

    corpus_lines = []
    fixture_lines = []
    for task_index, (task, (task_id, row)) in enumerate(zip(TASKS, PLAN), start=1):
        assert task["task_id"] == task_id
        corpus_lines.append(json.dumps({
            "task_id": task["task_id"],
            "prompt": task["prompt"],
            "entry_point": task["entry_point"],
            "tests": task["tests"],
            "timeout_ms": TIMEOUT_MS,
        }))
        eval_task = EvalTask(task["task_id"], task["prompt"], task["entry_point"],
                             task["tests"], TIMEOUT_MS)
        directive = task_directive(eval_task, config)
        system_text = build_system_prompt((), config.system_template)
        bundle = build_request(directive, system_text, config)
        for sample_index, letter in enumerate(row):
            key = compute_request_key(bundle, sample_index)
            reply = reply_for(task, letter, task_index, sample_index)
            fixture_lines.append(json.dumps({"key": key, "response": reply}))

    corpus_path.write_text("\n".join(corpus_lines) + "\n", encoding="utf-8")
    fixtures_path.write_text("\n".join(fixture_lines) + "\n", encoding="utf-8")
    print(f"wrote {len(corpus_lines)} tasks -> {corpus_path}")
    print(f"wrote {len(fixture_lines)} fixtures -> {fixtures_path}")
    print("plan totals:", dict(plan_totals))


if __name__ == "__main__":
    main()
