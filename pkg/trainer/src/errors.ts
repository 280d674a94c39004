/** Bad input data: misaligned tags, malformed files, diverged runs. Exit code 1. */
export class DataError extends Error {}

/** Bad invocation: unknown options, invalid hyperparameters, unreadable paths. Exit code 2. */
export class ConfigError extends Error {}
