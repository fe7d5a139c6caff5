# User value: This file writes synthetic demonstration streams, and their ground truth, for experiments.
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from sosc.bench.generator import GeneratorSpec, generate, spec_from_dict, with_seed
from sosc.config import RunConfig
from sosc.streams import write_stream, write_truth

logger = logging.getLogger("sosc.executors.generate")


def seeded_path(output: Path, seed: int) -> Path:
    output = Path(output)
    return output.with_name(f"{output.stem}.seed{seed}{output.suffix}")


def _write_one(spec: GeneratorSpec, path: Path) -> dict:
    stream = generate(spec)
    write_stream(path, stream)
    truth_file = write_truth(path, stream.truth)
    return {"stream": str(path), "truth": str(truth_file), "seed": spec.seed, "T": len(stream)}


def execute_generate(config: RunConfig) -> dict:
    base = spec_from_dict({**config.generator, "seed": config.seed})
    logger.info(
        "executor_start executor=generate D=%s K=%s T=%s seeds=%s",
        base.D,
        base.K,
        base.T,
        config.seeds,
    )
    if config.seeds == 1:
        written = [_write_one(base, Path(config.output))]
    else:
        jobs = [(with_seed(base, base.seed + i), seeded_path(config.output, base.seed + i)) for i in range(config.seeds)]
        # each job owns its rng and output file
        with ThreadPoolExecutor(max_workers=min(config.workers, len(jobs))) as pool:
            written = list(pool.map(lambda job: _write_one(*job), jobs))

    summary = {
        "D": base.D,
        "K": base.K,
        "T": base.T,
        "noise": base.noise,
        "dwell": list(base.dwell),
        "stages": 1 + len(base.schedule),
        "streams": written,
    }
    logger.info("generate_completed streams=%s", len(written))
    return summary
