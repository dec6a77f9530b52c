import json
import math

import numpy as np
import pytest

from causalzf import MalformedInputError, estimate_gamma_opt, precode
from causalzf.formats import (
    channel_from_dict,
    channel_to_dict,
    dumps,
    loads,
    precoder_from_dict,
    precoder_to_dict,
    record_from_dict,
    record_to_dict,
)

from conftest import random_fir


class TestChannel:
    def test_round_trip_bit_exact(self, rng):
        H = random_fir(rng, 2, 3, 4)
        back = channel_from_dict(loads(dumps(channel_to_dict(H))))
        assert back == H

    def test_format_optional(self):
        H = channel_from_dict({"m": 1, "n": 1, "coeffs": [[[[2.0, 0]]]]})
        assert H.coeff(0)[0, 0] == 2.0

    @pytest.mark.parametrize("doc,field", [
        ({"m": 0, "n": 1, "coeffs": [[[[1, 0]]]]}, "m"),
        ({"m": 1, "n": 1, "coeffs": []}, "coeffs"),
        ({"m": 1, "n": 2, "coeffs": [[[[1, 0]]]]}, "coeffs[0][0]"),
        ({"m": 1, "n": 1, "coeffs": [[[[1, "x"]]]]}, "coeffs[0][0][0]"),
        ({"format": "other", "m": 1, "n": 1, "coeffs": [[[[1, 0]]]]}, "format"),
    ])
    def test_errors_name_the_field(self, doc, field):
        with pytest.raises(MalformedInputError) as info:
            channel_from_dict(doc)
        assert info.value.field == field

    def test_rejects_nan_literal(self):
        with pytest.raises(MalformedInputError):
            loads('{"m": 1, "n": 1, "coeffs": [[[[NaN, 0]]]]}')

    def test_rejects_bad_json(self):
        with pytest.raises(MalformedInputError):
            loads("{")


class TestPrecoder:
    def test_round_trip(self, row_mixed):
        G = precode(row_mixed, 1.3).with_taylor(8)
        d = precoder_to_dict(G)
        back = precoder_from_dict(loads(dumps(d)))
        for name in "ABCD":
            np.testing.assert_array_equal(getattr(back.colligation, name),
                                          getattr(G.colligation, name))
        np.testing.assert_array_equal(back.taylor, G.taylor)
        assert back.gamma == G.gamma
        assert dumps(precoder_to_dict(back)) == dumps(d)

    def test_bad_gamma(self, row_mixed):
        d = json.loads(dumps(precoder_to_dict(precode(row_mixed, 1.3, verify=False))))
        d["gamma"] = -1
        with pytest.raises(MalformedInputError) as info:
            precoder_from_dict(d)
        assert info.value.field == "gamma"


class TestRecord:
    def test_round_trip(self, scalar_half):
        rec = estimate_gamma_opt(scalar_half, abs_tol=1e-3)
        back = record_from_dict(loads(dumps(record_to_dict(rec))))
        assert back.rho_seq == rec.rho_seq and back.gamma_estimate == rec.gamma_estimate
        assert back.stop_reason is rec.stop_reason

    def test_infinite_gamma(self, shift):
        d = record_to_dict(estimate_gamma_opt(shift))
        assert d["gamma_estimate"] == "inf"
        assert math.isinf(record_from_dict(d).gamma_estimate)
