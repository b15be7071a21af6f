"""Exception types shared across the package."""


class InventropyError(Exception):
    """Base class for package errors."""


class InvalidInputError(InventropyError, ValueError):
    """Caller-supplied data violates a documented precondition."""


class ScorerError(InventropyError):
    """A pairwise similarity provider failed on a specific pair."""

    def __init__(self, i: int, j: int, cause: Exception):
        super().__init__(f"similarity scorer failed on pair ({i}, {j}): {cause}")
        self.pair = (i, j)
        self.__cause__ = cause


class DegenerateSimilarityError(InventropyError):
    """An affinity row has no mass, so it cannot be normalised."""


class UndefinedConditionalError(InventropyError):
    """A conditioning state has zero marginal probability."""


class UndefinedMetricError(InventropyError):
    """Metric is undefined on this input (e.g. single-class labels)."""


class UnstableMetricError(InventropyError):
    """Metric was undefined on too many bootstrap resamples."""


class IncompleteSeriesError(InventropyError):
    """A temperature series is missing one of the requested temperatures."""

    def __init__(self, question_ids, temperature):
        ids = ", ".join(str(q) for q in question_ids)
        super().__init__(f"missing temperature {temperature} for questions: {ids}")
        self.question_ids = list(question_ids)
        self.temperature = temperature


class PerturbationError(InventropyError):
    """The perturbation engine could not produce any candidate texts."""


class ProviderError(InventropyError):
    """Base class for provider-side failures."""


class ProviderUnavailableError(ProviderError):
    """Transient provider failure that survived all retries."""

    def __init__(self, message: str, fingerprint: str | None = None):
        super().__init__(message)
        self.fingerprint = fingerprint


class ProviderConfigError(ProviderError):
    """Non-retryable provider failure (bad request, auth, wiring)."""


class ProviderContractError(ProviderError):
    """Provider returned data violating its declared contract."""


class UnjudgeableError(ProviderError):
    """Correctness judge did not produce a usable yes/no verdict."""


class EmptyTextError(InvalidInputError):
    """A text that must be non-empty was empty."""


class MissingArtifactError(InventropyError):
    """A pipeline stage input file is absent."""

    def __init__(self, path, required_stage: str):
        super().__init__(
            f"missing artifact {path}; run the '{required_stage}' stage first"
        )
        self.path = path
        self.required_stage = required_stage
