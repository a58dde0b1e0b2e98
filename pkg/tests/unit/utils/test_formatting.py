"""
Formatting utilities tests.
"""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from ntklab.utils.formatting import canonical_json, config_hash, format_float, parse_float


class TestFormatting:
    """
    Formatting utilities tests cases.
    """

    @settings(max_examples=200, derandomize=True)
    @given(value=st.floats(allow_nan=False, allow_infinity=True))
    def test_floats_round_trip_exactly(self, value):
        """
        GIVEN any float
        WHEN it is formatted and parsed back
        THEN the same float is recovered
        """
        assert parse_float(format_float(value)) == value

    def test_missing_values_are_empty_fields(self):
        """
        GIVEN None and an empty field
        WHEN they are formatted and parsed
        THEN they map onto each other
        """
        assert format_float(None) == ""
        assert parse_float("") is None
        assert parse_float("  ") is None

    def test_nan_is_written_as_nan(self):
        """
        GIVEN nan
        WHEN it is formatted and parsed back
        THEN the text is 'nan' and the value is nan
        """
        assert format_float(math.nan) == "nan"
        assert math.isnan(parse_float("nan"))

    def test_seventeen_significant_digits(self):
        """
        GIVEN 0.1
        WHEN it is formatted
        THEN its full binary value is written
        """
        assert format_float(0.1) == "0.10000000000000001"

    def test_config_hash_ignores_key_order(self):
        """
        GIVEN two dicts with the same items in different order
        WHEN they are hashed
        THEN the hashes agree and differ from a changed config
        """
        first = {"d": 4, "flow": {"eta": 0.25, "t_end": 1.0}}
        second = {"flow": {"t_end": 1.0, "eta": 0.25}, "d": 4}

        assert canonical_json(first) == canonical_json(second)
        assert config_hash(first) == config_hash(second)
        assert config_hash(first) != config_hash({"d": 5, "flow": {"eta": 0.25, "t_end": 1.0}})
        assert len(config_hash(first)) == 64
