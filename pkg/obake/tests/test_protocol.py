import unittest
from dataclasses import replace
from unittest.mock import patch

import numpy as np
from scipy.stats import chisquare

from ..errors import ParameterError
from ..protocol import kdf
from ..protocol.entropy import EntropySource, SeededEntropy, SystemEntropy
from ..protocol.kdf import Tag, Verifier
from ..protocol.messages import (
    AbortReason,
    MatchAnnounce,
    Outcome,
    OutcomeKind,
    Query,
    SessionId,
    Setup,
    TemplateResponse,
)
from ..protocol.params import FeatureVector, ProtocolParams
from ..protocol.system import (
    SystemPhase,
    system_abort,
    system_build_query,
    system_on_match,
    system_on_template,
    system_start,
)
from ..protocol.token import TokenPhase, blinding_vector, token_on_outcome, token_on_query, token_on_setup
from ..protocol.vector import cell_index, centralize, vec_add, vectorize

P = ProtocolParams.uniform(2, 8, 4)


class FixedEntropy(EntropySource):
    """Hands out prepared byte strings in order."""

    def __init__(self, *chunks: bytes):
        self.chunks = list(chunks)

    def token_bytes(self, n: int) -> bytes:
        chunk = self.chunks.pop(0)
        assert len(chunk) == n, f"test asked for {n} bytes, prepared {len(chunk)}"
        return chunk


def open_session(params, template, rng):
    """Run Setup and TemplateResponse; returns (system_state, token_state)."""
    system, setup = system_start(params, rng)
    token, response = token_on_setup(params, setup, template, rng)
    system = system_on_template(system, response)
    return system, token


def shifted(template: FeatureVector, offsets) -> FeatureVector:
    return FeatureVector(tuple(c + o for c, o in zip(template.components, offsets)), template.component_bits)


class TestSetup(unittest.TestCase):
    def test_hand_computed_blinding(self):
        setup = Setup(session_id=b"ab", global_nonce=bytes([10, 20]))
        template = FeatureVector.of((100, 50), P)
        state, response = token_on_setup(P, setup, template, FixedEntropy(bytes([5, 6])))

        self.assertEqual(blinding_vector(FeatureVector((10, 20), 8), bytes([5, 6]), P).components, (2, 8))
        self.assertEqual(response.blinded_template.components, (102, 58))
        self.assertEqual(state.phase, TokenPhase.AWAITING_QUERIES)
        self.assertEqual(state.precomputed_key, kdf.bbkdf(FeatureVector((12, 28), 8), P))
        self.assertEqual(
            state.precomputed_verifier,
            kdf.make_verifier(b"ab", bytes([10, 20]), state.precomputed_key, P),
        )

    def test_blinded_anchor_is_a_cell_center(self):
        params = ProtocolParams(dim=3, component_bits=16, thresholds=(4, 32, 256))
        rng = SeededEntropy(9)
        for _ in range(200):
            global_vector = vectorize(rng.token_bytes(6), params)
            blind_nonce = rng.token_bytes(6)
            anchor = vec_add(blinding_vector(global_vector, blind_nonce, params), global_vector)
            self.assertEqual(anchor, centralize(vec_add(global_vector, vectorize(blind_nonce, params)), params))
            for c, w, t in zip(anchor.components, params.cell_widths, params.thresholds):
                self.assertEqual(c % w, t)

    def test_malformed_setup_aborts_token(self):
        bad = Setup(session_id=b"ab", global_nonce=b"\x01")
        state, response = token_on_setup(P, bad, FeatureVector.zero(P), SeededEntropy(1))
        self.assertIsNone(response)
        self.assertEqual(state.phase, TokenPhase.ABORTED)
        self.assertEqual(state.abort_reason, AbortReason.PROTOCOL_VIOLATION)

        for session_id in (b"", b"q" * 256):
            bad_id = Setup(session_id=session_id, global_nonce=b"\x01\x02")
            state, response = token_on_setup(P, bad_id, FeatureVector.zero(P), SeededEntropy(1))
            self.assertIsNone(response)
            self.assertEqual(state.phase, TokenPhase.ABORTED)

    def test_session_id_bounds(self):
        self.assertEqual(bytes(SessionId(b"q" * 255)), b"q" * 255)
        for bad in (b"", b"q" * 256):
            with self.assertRaises(ParameterError):
                SessionId(bad)

    def test_wrong_template_dimension(self):
        setup = Setup(session_id=b"ab", global_nonce=b"\x01\x02")
        with self.assertRaises(ParameterError):
            token_on_setup(P, setup, FeatureVector((1, 2, 3), 8), SeededEntropy(1))


class TestSystemStart(unittest.TestCase):
    def test_fresh_values(self):
        rng = SystemEntropy()
        session_ids, nonces = set(), set()
        for _ in range(1000):
            state, setup = system_start(P, rng)
            self.assertEqual(state.phase, SystemPhase.AWAITING_TEMPLATE)
            self.assertEqual(len(setup.global_nonce), P.nonce_len_global)
            self.assertEqual(len(setup.session_id), 16)
            session_ids.add(setup.session_id)
            nonces.add(setup.global_nonce)
        self.assertEqual(len(session_ids), 1000)
        # a 2-byte N^G cannot be unique across 1000 draws; use a wider ring
        wide = ProtocolParams.uniform(8, 32, 4)
        self.assertEqual(len({system_start(wide, rng)[1].global_nonce for _ in range(1000)}), 1000)


class TestSystemOnTemplate(unittest.TestCase):
    def setUp(self):
        self.system, _ = system_start(P, SeededEntropy(3))

    def test_valid_template(self):
        state = system_on_template(self.system, TemplateResponse(FeatureVector((1, 2), 8)))
        self.assertEqual(state.phase, SystemPhase.QUERYING)
        self.assertEqual(state.current_round, -1)

    def test_wrong_dimension_aborts(self):
        state = system_on_template(self.system, TemplateResponse(FeatureVector((1, 2, 3), 8)))
        self.assertEqual(state.phase, SystemPhase.ABORTED)
        self.assertEqual(state.outcome, Outcome.abort(AbortReason.PROTOCOL_VIOLATION))

    def test_replayed_template_aborts(self):
        response = TemplateResponse(FeatureVector((1, 2), 8))
        state = system_on_template(system_on_template(self.system, response), response)
        self.assertEqual(state.abort_reason, AbortReason.PROTOCOL_VIOLATION)

    def test_terminal_state_absorbs(self):
        aborted = system_abort(self.system, AbortReason.ROUND_LIMIT)
        self.assertIs(system_on_template(aborted, TemplateResponse(FeatureVector((1, 2), 8))), aborted)


class TestQueryRound(unittest.TestCase):
    def setUp(self):
        self.template = FeatureVector.of((100, 50), P)
        self.rng = SeededEntropy(42)
        self.system, self.token = open_session(P, self.template, self.rng)
        self.v_prime = self.token.precomputed_verifier

    def _verifiers(self, *captures):
        self.system, query = system_build_query(self.system, list(captures), self.rng)
        return query

    def test_exact_capture_matches(self):
        query = self._verifiers(self.template)
        self.assertEqual(query.verifiers[0], self.v_prime)
        self.assertEqual(query.round, 0)
        self.assertEqual(len(query.challenge), 32)

    def test_capture_beyond_threshold_never_matches(self):
        for offsets in [(-4, 0), (0, -4), (5, 0), (0, -5), (8, 0), (-100, 3)]:
            query = self._verifiers(shifted(self.template, offsets))
            self.assertNotEqual(query.verifiers[0], self.v_prime, offsets)

    def test_lower_cell_edge_matches(self):
        query = self._verifiers(shifted(self.template, (4, 0)), shifted(self.template, (3, -3)))
        self.assertEqual(query.verifiers[0], self.v_prime)
        self.assertEqual(query.verifiers[1], self.v_prime)

    def test_equal_captures_give_equal_verifiers(self):
        capture = shifted(self.template, (9, 1))
        query = self._verifiers(capture, capture)
        self.assertEqual(query.verifiers[0], query.verifiers[1])
        self.assertEqual(self.system.round_keys[0], self.system.round_keys[1])

    def test_capture_count_checked(self):
        with self.assertRaises(ParameterError):
            system_build_query(self.system, [], self.rng)
        with self.assertRaises(ParameterError):
            system_build_query(self.system, [self.template] * (P.max_queries_per_round + 1), self.rng)

    def test_round_limit(self):
        params = ProtocolParams.uniform(2, 8, 4, max_rounds=2)
        system, _ = open_session(params, self.template, self.rng)
        for expected_round in range(2):
            system, query = system_build_query(system, [self.template], self.rng)
            self.assertEqual(query.round, expected_round)
        system, query = system_build_query(system, [self.template], self.rng)
        self.assertIsNone(query)
        self.assertEqual(system.outcome, Outcome.abort(AbortReason.ROUND_LIMIT))
        self.assertEqual(system.round_keys, ())

    def test_query_before_template_is_an_error(self):
        system, _ = system_start(P, self.rng)
        with self.assertRaises(ParameterError):
            system_build_query(system, [self.template], self.rng)


class TestTokenOnQuery(unittest.TestCase):
    def setUp(self):
        self.template = FeatureVector.of((30, 200), P)
        self.system, self.token = open_session(P, self.template, SeededEntropy(7))
        self.v_prime = self.token.precomputed_verifier
        self.others = [Verifier(bytes([i]) * 16) for i in range(1, 4)]

    def _query(self, verifiers, round_no=0, challenge=b"s" * 32):
        return Query(round=round_no, challenge=challenge, verifiers=tuple(verifiers))

    def test_reports_match_position(self):
        verifiers = [self.others[0], self.others[1], self.v_prime, self.others[2]]
        state, announce = token_on_query(self.token, self._query(verifiers))
        self.assertEqual(announce.index, 2)
        self.assertEqual(announce.round, 0)
        self.assertEqual(announce.tag, kdf.make_tag(self.token.session_id, b"s" * 32, self.token.precomputed_key, P))
        self.assertEqual(state.phase, TokenPhase.DONE)
        self.assertEqual(state.shared_key, self.token.precomputed_key)

    def test_smallest_index_wins(self):
        _, announce = token_on_query(self.token, self._query([self.others[0], self.v_prime, self.v_prime]))
        self.assertEqual(announce.index, 1)

    def test_no_match_keeps_waiting(self):
        state, announce = token_on_query(self.token, self._query(self.others))
        self.assertIsNone(announce)
        self.assertEqual(state.phase, TokenPhase.AWAITING_QUERIES)
        self.assertEqual(state.last_round, 0)

    def test_ignores_replayed_and_malformed_queries(self):
        state, _ = token_on_query(self.token, self._query(self.others, round_no=3))
        for bad in [
            self._query([self.v_prime], round_no=3),
            self._query([self.v_prime], round_no=1),
            self._query([self.v_prime], round_no=4, challenge=b"short"),
            self._query([], round_no=4),
            self._query([Verifier(b"x" * 15)], round_no=4),
            self._query([self.v_prime] * (P.max_queries_per_round + 1), round_no=4),
        ]:
            after, announce = token_on_query(state, bad)
            self.assertIsNone(announce)
            self.assertEqual(after, state)

    def test_terminal_states_absorb_queries(self):
        done, _ = token_on_query(self.token, self._query([self.v_prime]))
        again, announce = token_on_query(done, self._query([self.v_prime], round_no=1))
        self.assertIsNone(announce)
        self.assertEqual(again, done)

        aborted = self.token.mark_aborted(AbortReason.TAG_MISMATCH)
        _, announce = token_on_query(aborted, self._query([self.v_prime]))
        self.assertIsNone(announce)

    def test_query_before_setup_is_ignored(self):
        fresh = replace(self.token, phase=TokenPhase.AWAITING_SETUP)
        _, announce = token_on_query(fresh, self._query([self.v_prime]))
        self.assertIsNone(announce)

    def test_outcome_abort_discards_key(self):
        done, _ = token_on_query(self.token, self._query([self.v_prime]))
        kept = token_on_outcome(done, Outcome.established())
        self.assertEqual(kept.phase, TokenPhase.DONE)
        dropped = token_on_outcome(done, Outcome.abort(AbortReason.TAG_MISMATCH))
        self.assertEqual(dropped.phase, TokenPhase.ABORTED)
        self.assertIsNone(dropped.shared_key)
        self.assertIsNone(dropped.precomputed_key)


class TestTokenWork(unittest.TestCase):
    """The token does nothing but comparisons until a verifier matches."""

    def test_counters(self):
        template = FeatureVector.of((77, 140), P)
        rng = SeededEntropy(99)
        system, token = open_session(P, template, rng)
        miss = [shifted(template, (20, 0)), shifted(template, (0, -30)), shifted(template, (64, 64))]

        with patch.object(kdf, "mac", wraps=kdf.mac) as mac_calls, \
                patch.object(kdf, "bbkdf", wraps=kdf.bbkdf) as bbkdf_calls, \
                patch.object(kdf, "ct_equal", wraps=kdf.ct_equal) as compare_calls:
            system, query = system_build_query(system, miss, rng)
            mac_calls.reset_mock()
            bbkdf_calls.reset_mock()
            token, announce = token_on_query(token, query)
            self.assertIsNone(announce)
            self.assertEqual(mac_calls.call_count, 0)
            self.assertEqual(bbkdf_calls.call_count, 0)
            self.assertEqual(compare_calls.call_count, 3)

            system, query = system_build_query(system, [miss[0], template], rng)
            mac_calls.reset_mock()
            bbkdf_calls.reset_mock()
            compare_calls.reset_mock()
            token, announce = token_on_query(token, query)
            self.assertEqual(announce.index, 1)
            self.assertEqual(mac_calls.call_count, 1)
            self.assertEqual(bbkdf_calls.call_count, 0)
            self.assertEqual(compare_calls.call_count, 2)


class TestSystemOnMatch(unittest.TestCase):
    def setUp(self):
        self.template = FeatureVector.of((12, 99), P)
        self.rng = SeededEntropy(5)
        system, self.token = open_session(P, self.template, self.rng)
        self.system, self.query = system_build_query(system, [shifted(self.template, (9, 9)), self.template], self.rng)
        self.token_done, self.announce = token_on_query(self.token, self.query)

    def test_honest_match_establishes_key(self):
        state, outcome = system_on_match(self.system, self.announce)
        self.assertEqual(outcome.kind, OutcomeKind.KEY_ESTABLISHED)
        self.assertEqual(state.phase, SystemPhase.DONE)
        self.assertEqual(state.shared_key, self.token_done.shared_key)

    def test_flipped_tag_bit(self):
        tag = bytearray(self.announce.tag.value)
        tag[5] ^= 0x10
        state, outcome = system_on_match(self.system, replace(self.announce, tag=Tag(bytes(tag))))
        self.assertEqual(outcome, Outcome.abort(AbortReason.TAG_MISMATCH))
        self.assertIsNone(state.shared_key)

    def test_index_out_of_range(self):
        _, outcome = system_on_match(self.system, replace(self.announce, index=2))
        self.assertEqual(outcome, Outcome.abort(AbortReason.PROTOCOL_VIOLATION))

    def test_stale_round(self):
        system, _ = system_build_query(self.system, [self.template], self.rng)
        _, outcome = system_on_match(system, self.announce)
        self.assertEqual(outcome, Outcome.abort(AbortReason.PROTOCOL_VIOLATION))

    def test_match_before_any_query(self):
        system, _ = system_start(P, self.rng)
        _, outcome = system_on_match(system, self.announce)
        self.assertEqual(outcome.reason, AbortReason.PROTOCOL_VIOLATION)

    def test_terminal_state_absorbs(self):
        done, _ = system_on_match(self.system, self.announce)
        forged = MatchAnnounce(round=0, index=0, tag=Tag(b"\x00" * 32))
        again, outcome = system_on_match(done, forged)
        self.assertIs(again, done)
        self.assertTrue(outcome.is_success)


class TestProperties(unittest.TestCase):
    def test_completeness(self):
        """1,000 sessions with sub-threshold noise all agree on a key in round 0."""
        rng = np.random.default_rng(1)
        entropy = SeededEntropy(1)
        for _ in range(1000):
            dim = int(rng.choice([2, 8, 16]))
            bits = int(rng.choice([8, 16]))
            t = int(rng.choice([4, 8, 16]))
            params = ProtocolParams.uniform(dim, bits, t)
            template = FeatureVector.from_array(rng.integers(0, params.modulus, dim), bits)
            capture = FeatureVector.from_array(
                (template.as_array() + rng.integers(-(t - 1), t, dim)) % params.modulus, bits
            )
            system, token = open_session(params, template, entropy)
            system, query = system_build_query(system, [capture], entropy)
            token, announce = token_on_query(token, query)
            self.assertIsNotNone(announce)
            system, outcome = system_on_match(system, announce)
            self.assertTrue(outcome.is_success)
            self.assertEqual(system.shared_key.value, token.shared_key.value)
            self.assertEqual(system.rounds_used, 1)

    def test_boundary_soundness(self):
        """One dimension off by -t or by more than t: the verifier never matches."""
        rng = np.random.default_rng(2)
        entropy = SeededEntropy(2)
        for _ in range(1000):
            dim = int(rng.choice([2, 8]))
            t = int(rng.choice([4, 8, 16]))
            params = ProtocolParams.uniform(dim, 8, t)
            template = FeatureVector.from_array(rng.integers(0, 256, dim), 8)
            offsets = np.zeros(dim, dtype=np.int64)
            magnitude = int(rng.choice([t, t + 1, 2 * t]))
            offsets[rng.integers(dim)] = -magnitude if magnitude == t else int(rng.choice([-1, 1])) * magnitude
            capture = FeatureVector.from_array((template.as_array() + offsets) % 256, 8)

            system, token = open_session(params, template, entropy)
            system, query = system_build_query(system, [capture], entropy)
            self.assertNotEqual(query.verifiers[0], token.precomputed_verifier)
            token, announce = token_on_query(token, query)
            self.assertIsNone(announce)

    def test_adversarial_rounds_hit_the_limit(self):
        params = ProtocolParams.uniform(4, 8, 4, max_rounds=3)
        template = FeatureVector.of((1, 2, 3, 4), params)
        entropy = SeededEntropy(3)
        system, token = open_session(params, template, entropy)
        capture = shifted(template, (5, 0, 0, 0))
        while True:
            system, query = system_build_query(system, [capture] * 4, entropy)
            if query is None:
                break
            token, announce = token_on_query(token, query)
            self.assertIsNone(announce)
        self.assertEqual(system.outcome, Outcome.abort(AbortReason.ROUND_LIMIT))
        self.assertEqual(system.rounds_used, 3)

    def test_cell_index_hiding(self):
        """For a fixed template the cell of C is uniform in every dimension."""
        template = FeatureVector.of((100, 50), P)
        entropy = SeededEntropy(2024)
        counts = np.zeros((P.dim, P.cells_per_dim[0]), dtype=np.int64)
        for _ in range(10_000):
            _, setup = system_start(P, entropy)
            _, response = token_on_setup(P, setup, template, entropy)
            for dim, index in enumerate(cell_index(response.blinded_template, P)):
                counts[dim, index] += 1
        for dim in range(P.dim):
            _, p_value = chisquare(counts[dim])
            self.assertGreater(p_value, 0.001)


if __name__ == "__main__":
    unittest.main()
