import json
import logging

import pytest
from pydantic import ValidationError

from ntklab.service_layer.check_service import CheckService


class TestCheckService:
    @pytest.fixture
    def service(self):
        return CheckService()

    def _write(self, tmp_path, **values):
        path = tmp_path / "params.json"
        path.write_text(json.dumps(values))
        return path

    def test_sentinel_tuple_holds(self, service, tmp_path):
        """
        GIVEN a tuple inside the feasible region
        WHEN it is loaded and checked
        THEN every condition holds
        """
        path = self._write(tmp_path, n=10**6, m=10**26, d=2000, epsilon=1.9, delta=0.5, lambda_epsilon=1 / 8000)

        report = service.check(service.load(path))

        assert report.all_hold
        assert report.chosen_U == 9

    def test_failing_conditions_are_logged(self, service, tmp_path, caplog):
        """
        GIVEN d = 4 and m = 10^6
        WHEN the tuple is checked
        THEN the failing conditions are logged most binding first
        """
        path = self._write(tmp_path, n=1000, m=10**6, d=4, epsilon=0.5, delta=0.1, lambda_epsilon=1 / 16)

        with caplog.at_level(logging.INFO):
            report = service.check(service.load(path))

        assert not report.all_hold
        assert "Failing conditions" in caplog.text
        assert "default absolute constant" in caplog.text

    def test_missing_field(self, service, tmp_path):
        """
        GIVEN a tuple without delta
        WHEN it is loaded
        THEN a ValidationError is raised
        """
        path = self._write(tmp_path, n=1000, m=1000, d=10, epsilon=1.0, lambda_epsilon=1 / 40)

        with pytest.raises(ValidationError):
            service.load(path)
