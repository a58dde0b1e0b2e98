"""Service computing the eigenvalue table and its quadrature cross-check."""

import logging

from ntklab.domain.models.spectrum import QUADRATURE_MAX_ORDER, build_spectrum, eigenvalue_quadrature
from ntklab.domain.schemas.report import SpectrumResponse, SpectrumRow
from ntklab.settings.lab_settings import LabSettings

log = logging.getLogger(__name__)

VANISHING_TOLERANCE = 1e-10


class SpectrumService:
    """Application service for the NTK spectrum."""

    def __init__(self, settings: LabSettings):
        """Initialize spectrum service."""
        self.settings = settings

    def table(self, d: int, h_max: int, oracle: bool = False) -> SpectrumResponse:
        """Eigenvalue table for orders 0..h_max, optionally with quadrature values next to the closed forms.

        The oracle covers orders up to the quadrature limit. Nonzero eigenvalues are compared relatively against
        ``ORACLE_TOLERANCE``; vanishing ones absolutely against 1e-10.
        """
        spectrum = build_spectrum(d, h_max)
        rows = [SpectrumRow(**entry.model_dump()) for entry in spectrum.entries]
        response = SpectrumResponse(d=d, h_max=h_max, lambda_1=spectrum.lambda_1, entries=rows)
        if not oracle:
            return response

        relative, vanishing = [], []
        for row in rows:
            if row.h > QUADRATURE_MAX_ORDER:
                continue
            row.quadrature = eigenvalue_quadrature(row.h, d)
            if row.value == 0.0:
                vanishing.append(abs(row.quadrature))
            else:
                row.relative_error = abs(row.quadrature - row.value) / abs(row.value)
                relative.append(row.relative_error)
        response.max_relative_error = max(relative, default=0.0)
        response.max_vanishing_error = max(vanishing, default=0.0)
        response.oracle_passed = (
            response.max_relative_error <= self.settings.ORACLE_TOLERANCE
            and response.max_vanishing_error <= VANISHING_TOLERANCE
        )
        log.info(
            "Quadrature oracle for d=%s: max relative error %.3e, max vanishing error %.3e",
            d,
            response.max_relative_error,
            response.max_vanishing_error,
        )
        return response
