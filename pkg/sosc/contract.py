# User value: This file keeps file formats, verbs and exit codes stable so saved models and scripts keep working.
MODEL_SCHEMA_VERSION = 1

MODEL_KIND_PLAIN = "plain"
MODEL_KIND_TP = "tp"
MODEL_KINDS = (MODEL_KIND_PLAIN, MODEL_KIND_TP)

CLI_VERBS = ("generate", "fit", "eval", "plan", "shared", "combine-frames")

WEIGHT_LINEAR = "linear"
WEIGHT_ELIGIBILITY = "eligibility"
WEIGHT_CONSTANT = "constant"
WEIGHT_MODES = (WEIGHT_LINEAR, WEIGHT_ELIGIBILITY, WEIGHT_CONSTANT)

FIT_LOG_HEADER = ("t", "z", "K", "d_z", "loss", "s")


def plan_header(m: int) -> list[str]:
    return ["t", "z"] + [f"{p}_{i}" for p in ("ref", "pos", "vel", "u") for i in range(m)]


def shared_header(m: int) -> list[str]:
    return (
        ["t"]
        + [f"operator_{i}" for i in range(m)]
        + [f"desired_{i}" for i in range(m)]
        + [f"state_{i}" for i in range(2 * m)]
    )


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

# Sentinel returned by the assignment rules when a new cluster wins.
NEW = -1
