"""
Benchmark harness: experiment specs, workload runner, oracle verification and CSV output
"""
