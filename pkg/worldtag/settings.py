# Worldtag settings and tuning parameters
# All values are centralized here so defaults can be tweaked in one place.
# A settings.json in the working directory may overlay the keys listed in OVERLAY_KEYS.

TOOL_NAME = "worldtag"
TOOL_VERSION = "0.3.0"

# Tokenizer defaults (see model.TokenizerOptions)
SPLIT_PUNCTUATION = True   # punctuation forms its own tokens
PUNCTUATION_RUNS = True    # "..." or "* * *" pieces stay one token per run

# Parser
EXCERPT_LENGTH = 40        # characters of raw input quoted in a diagnostic

# Element agreement
ELEMENT_MODE = "positions"  # "positions" (token indices) or "forms" (lowercased surfaces)

# Mismatch taxonomy for matched text worlds
MISMATCH_DISTANCE_RATIO = 0.10  # l_min above this share of the source stretch = dissimilar text
MISMATCH_ORDINAL_GAP = 2        # |i - j| above this = far apart in the narrative

# Consensus
CONSENSUS_THRESHOLD = 0.5  # strict majority of 6 annotators needs >= 3

# Report output
ROUND_DIGITS = None        # None = full precision
JOBS = 1                   # worker threads for parsing and matching

# POS sidecar
POS_UNKNOWN = "X"          # tag for switch tokens the sidecar does not list
POS_GROUPS = {
    "VERB": "verb",
    "AUX": "verb",
    "V": "verb",
    "NOUN": "noun",
    "PROPN": "noun",
    "S": "noun",
    "ADJ": "adjective",
    "A": "adjective",
    "PUNCT": "punctuation",
    "PUNC": "punctuation",
}
POS_OTHER_GROUP = "other"

# Logging
LOG_LEVEL = "WARNING"
LOG_FORMAT = "[%(name)s] %(levelname)s %(message)s"

# Keys settings.json may override, with the type each value is coerced to
OVERLAY_KEYS = {
    "split_punctuation": ("SPLIT_PUNCTUATION", bool),
    "punctuation_runs": ("PUNCTUATION_RUNS", bool),
    "element_mode": ("ELEMENT_MODE", str),
    "consensus_threshold": ("CONSENSUS_THRESHOLD", float),
    "round_digits": ("ROUND_DIGITS", int),
    "jobs": ("JOBS", int),
    "log_level": ("LOG_LEVEL", str),
}
