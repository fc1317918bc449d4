"""Rebuild one failed node two ways and compare who shipped how much.

Creates a 7-node evenodd cluster (p=5, 16-byte blocks), kills node 2,
then repairs it once with the bandwidth-aware planner and once by plain
k-column decoding. The per-node ledgers show the planner touching every
surviving node a little instead of five nodes a lot.
"""

from arraycode.simnet import create_cluster, fail_nodes, run_repair, session_report

P = 5
BLOCK_SIZE = 16
FAIL = 2


def show(result):
    ledger = result.ledger
    print(f"  strategy={result.strategy_used}  total={ledger.total_blocks} "
          f"blocks ({ledger.total_bytes} bytes)  verified={result.verified}")
    for entry in ledger.per_node():
        print(f"    node {entry['id']:>2}: {entry['blocks']:>3} blocks")


def main():
    for strategy in ("paper", "naive"):
        cluster = create_cluster("evenodd", P, block_size=BLOCK_SIZE, seed=7)
        fail_nodes(cluster, [FAIL])
        result = run_repair(cluster, FAIL, strategy)
        print(f"repair of node {FAIL} on evenodd p={P}:")
        show(result)
        report = session_report(cluster, [FAIL], strategy, [result])
        print(f"  session {report['session']}: gamma_blocks={report['gamma_blocks']}")
        print()


if __name__ == "__main__":
    main()
