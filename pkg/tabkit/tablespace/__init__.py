from .base import (
    NO_BINDINGS,
    AnswerResult,
    Census,
    PredicateCensus,
    SubgoalCensus,
    SubgoalHandle,
    TableEntry,
    TableSpace,
    TableStats,
)
from .buckets import MAX_THREADS, BucketArray
from .designs import (
    DESIGNS,
    FullSharing,
    NoSharing,
    PartialAnswerSharing,
    PrivateAnswerChaining,
    SubgoalSharing,
    make_tablespace,
)
from .frames import COMPLETE, EVALUATING, SubgoalEntry, SubgoalFrame
