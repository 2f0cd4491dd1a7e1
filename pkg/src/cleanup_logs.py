#!/usr/bin/env python3
"""
Prune hermq run logs

Every CLI run leaves logs/hermq_<timestamp>.log and, for normalize, a
matching *_steps.jsonl step log. This keeps the directory bounded.

Usage:
    python cleanup_logs.py --days 30    # keep runs from the last 30 days
    python cleanup_logs.py --count 10   # keep the 10 most recent runs
"""

import argparse
from datetime import datetime, timedelta
from pathlib import Path
from typing import List, Optional

import config

PATTERNS = ("hermq_*.log", "hermq_*_steps.jsonl")


def find_run_files(log_dir: Path) -> List[Path]:
    files = {p for pattern in PATTERNS for p in log_dir.glob(pattern)}
    return sorted(files, key=lambda p: p.stat().st_mtime, reverse=True)


def select_for_deletion(files: List[Path], days: Optional[int] = None, count: Optional[int] = None) -> List[Path]:
    """Files outside the retention window; files must be newest first"""
    if days is not None:
        cutoff = datetime.now() - timedelta(days=days)
        return [p for p in files if datetime.fromtimestamp(p.stat().st_mtime) < cutoff]
    if count is not None:
        runs: List[str] = []
        doomed = []
        for p in files:
            run = p.name.replace("_steps.jsonl", "").replace(".log", "")
            if run not in runs:
                runs.append(run)
            if runs.index(run) >= count:
                doomed.append(p)
        return doomed
    return []


def cleanup_old_logs(log_dir, days: Optional[int] = None, count: Optional[int] = None,
                     dry_run: bool = False) -> List[Path]:
    log_dir = Path(log_dir)
    if not log_dir.exists():
        print(f"Log directory doesn't exist: {log_dir}")
        return []
    files = find_run_files(log_dir)
    if not files:
        print("No log files found")
        return []
    print(f"Found {len(files)} log files")
    doomed = select_for_deletion(files, days, count)
    total = 0
    for p in doomed:
        size = p.stat().st_size
        total += size
        print(f"{'Would delete' if dry_run else 'Deleting'}: {p.name} ({size / 1024:.1f} KB)")
        if not dry_run:
            p.unlink()
    if doomed:
        print(f"{'Would free' if dry_run else 'Freed'} {total / 1024:.1f} KB in {len(doomed)} files")
    else:
        print("No files to delete")
    return doomed


def main():
    parser = argparse.ArgumentParser(description="Clean up old hermq log files")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--days', type=int, help='Keep logs newer than this many days')
    group.add_argument('--count', type=int, help='Keep this many most recent runs')
    parser.add_argument('--log-dir', default=config.LOG_DIR, help=f'Log directory (default: {config.LOG_DIR})')
    parser.add_argument('--dry-run', action='store_true', help='Only list what would be deleted')
    args = parser.parse_args()
    cleanup_old_logs(args.log_dir, args.days, args.count, args.dry_run)


if __name__ == '__main__':
    main()
