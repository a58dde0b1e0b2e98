"""
Test suite for file codecs
"""

import numpy as np
import pytest

from ntklab.adapters.codecs import (
    TRAJECTORY_COLUMNS,
    decode_checkpoint,
    decode_dataset,
    decode_gram_binary,
    encode_checkpoint,
    encode_dataset,
    encode_gram_binary,
    encode_gram_csv,
    encode_trajectory_csv,
)
from ntklab.domain.errors import CodecError
from ntklab.domain.models.flow import FlowConfig, run_empirical
from ntklab.domain.models.kernel import gram_analytical


class TestDatasetCodec:
    """
    Test cases for the dataset CSV
    """

    def test_header_and_exact_values(self, dataset):
        """
        GIVEN a dataset in d = 4
        WHEN it is encoded and decoded
        THEN the header names every column and the values are identical
        """
        text = encode_dataset(dataset)
        decoded = decode_dataset(text)

        assert text.splitlines()[0] == "x_0,x_1,x_2,x_3,y,xi_star"
        np.testing.assert_array_equal(decoded.X, dataset.X)
        np.testing.assert_array_equal(decoded.y, dataset.y)
        np.testing.assert_array_equal(decoded.noise, dataset.noise)

    def test_bad_header(self):
        """
        GIVEN a CSV with the wrong header
        WHEN it is decoded
        THEN a CodecError is raised
        """
        with pytest.raises(CodecError):
            decode_dataset("a,b,c\n1,2,3\n")


class TestCheckpointCodec:
    """
    Test cases for binary network checkpoints
    """

    def test_round_trip(self, state):
        """
        GIVEN a network state
        WHEN it is encoded and decoded
        THEN weights and signs are identical
        """
        decoded = decode_checkpoint(encode_checkpoint(state))

        np.testing.assert_array_equal(decoded.W, state.W)
        np.testing.assert_array_equal(decoded.a, state.a)

    def test_bad_magic(self, state):
        """
        GIVEN a checkpoint whose magic bytes were changed
        WHEN it is decoded
        THEN a CodecError is raised
        """
        data = b"XXXX" + encode_checkpoint(state)[4:]

        with pytest.raises(CodecError):
            decode_checkpoint(data)

    def test_truncated_file(self, state):
        """
        GIVEN a checkpoint missing its last byte
        WHEN it is decoded
        THEN a CodecError is raised
        """
        with pytest.raises(CodecError):
            decode_checkpoint(encode_checkpoint(state)[:-1])


class TestGramCodec:
    """
    Test cases for Gram matrix files
    """

    def test_binary_round_trip(self, points):
        """
        GIVEN an analytical Gram matrix
        WHEN it is written in binary and read back
        THEN the entries are identical
        """
        H = gram_analytical(points).H

        np.testing.assert_array_equal(decode_gram_binary(encode_gram_binary(H)), H)

    def test_csv_has_one_row_per_point(self, points):
        """
        GIVEN an analytical Gram matrix of 20 points
        WHEN it is written as CSV
        THEN there are 20 rows of 20 fields
        """
        rows = encode_gram_csv(gram_analytical(points).H).splitlines()

        assert len(rows) == 20
        assert all(len(row.split(",")) == 20 for row in rows)

    def test_non_square_matrix(self):
        """
        GIVEN a non-square matrix
        WHEN it is encoded
        THEN a CodecError is raised
        """
        with pytest.raises(CodecError):
            encode_gram_binary(np.zeros((2, 3)))

    def test_wrong_size(self, points):
        """
        GIVEN a binary Gram file missing entries
        WHEN it is decoded
        THEN a CodecError is raised
        """
        with pytest.raises(CodecError):
            decode_gram_binary(encode_gram_binary(gram_analytical(points).H)[:-8])


class TestTrajectoryCodec:
    """
    Test cases for the trajectory CSV
    """

    def test_columns_and_missing_fields(self, state, dataset):
        """
        GIVEN an empirical run without f*
        WHEN its trajectory is written
        THEN the header is fixed and risk columns not computed are empty
        """
        trajectory = run_empirical(state, dataset, FlowConfig(eta=0.5, t_end=1.0))

        lines = encode_trajectory_csv(trajectory).splitlines()
        first = dict(zip(TRAJECTORY_COLUMNS, lines[1].split(",")))

        assert lines[0].split(",") == [
            "t",
            "empirical_risk",
            "excess_risk",
            "excess_risk_stderr",
            "estimation_gap",
            "estimation_gap_stderr",
            "max_move",
            "gram_min_eig",
        ]
        assert len(lines) == 1 + len(trajectory.points)
        assert first["t"] == "0"
        assert first["excess_risk"] == ""
        assert first["estimation_gap"] == ""
        assert first["gram_min_eig"] == ""
