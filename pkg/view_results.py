"""
View Results from Database
Simple script to list stored benchmark runs and inspect or export one
"""

from database import get_db
from models import ExperimentRun, RunRecordRow, IndexBuildRow
import json
import os

import config


def view_all_runs():
    """List all runs in database"""
    db = get_db()
    try:
        runs = db.query(ExperimentRun).order_by(ExperimentRun.created_at.desc()).all()
        print(f"\n{'='*60}")
        print(f"Total Runs: {len(runs)}")
        print(f"{'='*60}\n")

        for run in runs:
            print(f"ID: {run.id}")
            print(f"Command: {run.command}  Dataset: {run.dataset}  Weights: {run.weight_kind}")
            print(f"Status: {run.status}")
            print(f"Created: {run.created_at}")
            print(f"Records: {len(run.records)}  Index builds: {len(run.builds)}")
            if run.error_message:
                print(f"Error: {run.error_message}")
            print("-" * 60)
    finally:
        db.close()


def view_run_details(run_id):
    """View the records and index builds of one run"""
    db = get_db()
    try:
        run = db.query(ExperimentRun).filter_by(id=run_id).first()

        if not run:
            print(f"Run {run_id} not found")
            return

        print(f"\n{'='*60}")
        print(f"Run: {run.id}")
        print(f"{'='*60}\n")
        print(f"Command: {run.command}")
        print(f"Dataset: {run.dataset} ({run.weight_kind})")
        print(f"Seed: {run.seed}")
        print(f"Status: {run.status}")
        if run.csv_path:
            print(f"CSV: {run.csv_path}")

        builds = db.query(IndexBuildRow).filter_by(run_id=run_id).all()
        if builds:
            print(f"\nIndex builds ({len(builds)})")
            for build in builds:
                print(f"  {build.method:<8} {build.index_bytes:>14,} bytes {build.build_ms:>12.1f} ms")

        records = db.query(RunRecordRow).filter_by(run_id=run_id).order_by(RunRecordRow.method).all()

        print(f"\n{'='*60}")
        print(f"Query Records ({len(records)})")
        print(f"{'='*60}\n")

        for record in records:
            params = record.parameters or {}
            print(f"{record.method}  k={params.get('k')}  density={params.get('density', '-')}")
            print(f"  Time (us) - mean: {record.mean_us:.1f}, p50: {record.p50_us:.1f}, "
                  f"p95: {record.p95_us:.1f}, p99: {record.p99_us:.1f}")
            print(f"  Settled: {record.settled:.1f}  Pushes: {record.pushes:.1f}")
            if record.false_hits is not None:
                print(f"  Oracle calls: {record.oracle_calls:.1f}  False hits: {record.false_hits:.1f}")
            if record.vertices_bypassed is not None:
                print(f"  Vertices bypassed: {record.vertices_bypassed:.1f}")
            if record.path_cost is not None:
                print(f"  Path cost: {record.path_cost:.1f}")
            print()

    finally:
        db.close()


def export_run_to_json(run_id, output_file=None):
    """Export a run with its records and builds to a JSON file"""
    db = get_db()
    try:
        run = db.query(ExperimentRun).filter_by(id=run_id).first()

        if not run:
            print(f"Run {run_id} not found")
            return

        result = run.to_dict()
        result['records'] = [r.to_dict() for r in run.records]
        result['builds'] = [b.to_dict() for b in run.builds]

        if not output_file:
            output_file = os.path.join(config.RESULTS_DIR, f"run_{run_id}.json")

        os.makedirs(os.path.dirname(output_file) or '.', exist_ok=True)

        with open(output_file, 'w') as f:
            json.dump(result, f, indent=2)

        print(f"Run exported to: {output_file}")
        return output_file

    finally:
        db.close()


if __name__ == '__main__':
    import sys

    if len(sys.argv) < 2:
        print("Usage:")
        print("  python view_results.py runs                          # List all runs")
        print("  python view_results.py view <run_id>                 # View run details")
        print("  python view_results.py export <run_id> [output_file] # Export to JSON")
        sys.exit(1)

    command = sys.argv[1]

    if command == 'runs':
        view_all_runs()
    elif command == 'view':
        if len(sys.argv) < 3:
            print("Error: run_id required")
            sys.exit(1)
        view_run_details(sys.argv[2])
    elif command == 'export':
        if len(sys.argv) < 3:
            print("Error: run_id required")
            sys.exit(1)
        output_file = sys.argv[3] if len(sys.argv) > 3 else None
        export_run_to_json(sys.argv[2], output_file)
    else:
        print(f"Unknown command: {command}")
        sys.exit(1)
