import unittest
from typing import List, Tuple

from ..core.event_bus import EventBus
from ..core.inprocess_transport import InProcessTransport
from ..core.session_runner import SessionOptions, SessionRunner, derive_seed, run_session
from ..core.tampering import Tamperer, TamperMode, corrupt_query, flip_tag_bit
from ..errors import ParameterError, TransportError
from ..events import EventType
from ..interfaces.sensor import NoiseKind, NoiseModel
from ..interfaces.transport import ChannelEndpoint, TransportKind, TransportOptions
from ..protocol.codec import decode, encode
from ..protocol.kdf import Tag, Verifier
from ..protocol.messages import AbortReason, MatchAnnounce, MessageType, OutcomeKind, Query
from ..protocol.params import FeatureVector, ProtocolParams

P = ProtocolParams.uniform(4, 8, 4, max_rounds=4)
TEMPLATE = FeatureVector.of((10, 20, 30, 40), P)
EXACT = NoiseModel(NoiseKind.BOUNDED_UNIFORM, (0,))


class ClosedTokenTransport(InProcessTransport):
    """In-process channel whose token side is already closed."""

    def open_pair(self) -> Tuple[ChannelEndpoint, ChannelEndpoint]:
        system_end, token_end = super().open_pair()
        token_end.close()
        return system_end, token_end


class TestDeriveSeed(unittest.TestCase):
    def test_stable_and_separated(self):
        self.assertEqual(derive_seed(1, 2), derive_seed(1, 2))
        self.assertNotEqual(derive_seed(1, 2), derive_seed(1, 3))
        self.assertNotEqual(derive_seed(1, 2), derive_seed(1, 2, b"token"))
        self.assertTrue(0 <= derive_seed(2**64 - 1, 2**64 - 1) < 2**64)

    def test_range_checked(self):
        with self.assertRaises(ValueError):
            derive_seed(-1, 0)
        with self.assertRaises(ValueError):
            derive_seed(0, 2**64)


class TestSessions(unittest.TestCase):
    def test_exact_capture_establishes_in_first_round(self):
        outcome = run_session(P, TEMPLATE, EXACT, TransportKind.IN_PROCESS, seed=1)
        self.assertTrue(outcome.succeeded)
        self.assertTrue(outcome.keys_agree)
        self.assertEqual(outcome.matched_round, 0)
        self.assertEqual(outcome.rounds_used, 1)
        self.assertEqual(outcome.queries_sent, 1)
        self.assertEqual(outcome.verifiers_sent, P.max_queries_per_round)
        self.assertEqual(len(outcome.system_key.value), P.key_len)
        self.assertIsNone(outcome.reason)

    def test_transports_agree(self):
        model = NoiseModel(NoiseKind.GAUSSIAN, (3.0,))
        for seed in (3, 4, 5):
            over_queues = run_session(P, TEMPLATE, model, TransportKind.IN_PROCESS, seed)
            over_tcp = run_session(P, TEMPLATE, model, TransportKind.TCP_LOOPBACK, seed)
            self.assertEqual(over_queues, over_tcp)

    def test_same_seed_same_session(self):
        model = NoiseModel(NoiseKind.BOUNDED_UNIFORM, (6,))
        first = run_session(P, TEMPLATE, model, TransportKind.IN_PROCESS, 99)
        second = run_session(P, TEMPLATE, model, TransportKind.IN_PROCESS, 99)
        self.assertEqual(first, second)

    def test_far_captures_hit_round_limit(self):
        for offset in (4 + 1, -4, 64):
            with self.subTest(offset=offset):
                model = NoiseModel(NoiseKind.ADVERSARIAL, (offset, 0, 0, 0))
                outcome = run_session(P, TEMPLATE, model, TransportKind.IN_PROCESS, seed=2)
                self.assertEqual(outcome.kind, OutcomeKind.ABORT)
                self.assertEqual(outcome.reason, AbortReason.ROUND_LIMIT)
                self.assertEqual(outcome.rounds_used, P.max_rounds)
                self.assertEqual(outcome.queries_sent, P.max_rounds)
                self.assertIsNone(outcome.system_key)
                self.assertIsNone(outcome.token_key)
                self.assertIsNone(outcome.suspect_peer)

    def test_flipped_tag_is_rejected(self):
        outcome = run_session(P, TEMPLATE, EXACT, TransportKind.IN_PROCESS, seed=7,
                              tamper=TamperMode.FLIP_TAG_BIT, token_id="badge-17")
        self.assertEqual(outcome.reason, AbortReason.TAG_MISMATCH)
        self.assertEqual(outcome.suspect_peer, "badge-17")
        self.assertEqual(outcome.matched_round, 0)
        self.assertIsNone(outcome.system_key)
        self.assertIsNone(outcome.token_key)

    def test_corrupted_first_query_is_ignored(self):
        outcome = run_session(P, TEMPLATE, EXACT, TransportKind.TCP_LOOPBACK, seed=8,
                              tamper=TamperMode.CORRUPT_QUERY)
        self.assertTrue(outcome.succeeded)
        self.assertTrue(outcome.keys_agree)
        self.assertEqual(outcome.matched_round, 1)
        self.assertEqual(outcome.queries_sent, 2)

    def test_closed_channel_raises(self):
        bus = EventBus()
        errors: List[str] = []
        bus.subscribe(EventType.SESSION_ERROR, lambda event_type, token_id, error: errors.append(error))
        runner = SessionRunner(P, ClosedTokenTransport(TransportOptions(receive_timeout=2.0)), bus)
        with self.assertRaises(TransportError):
            runner.run(TEMPLATE, EXACT, seed=1)
        self.assertEqual(len(errors), 1)

    def test_unusable_noise_model_fails_before_the_session(self):
        bus = EventBus()
        started = []
        bus.subscribe(EventType.SESSION_STARTED, lambda event_type, **data: started.append(data))
        with self.assertRaises(ParameterError):
            run_session(P, TEMPLATE, NoiseModel(NoiseKind.GAUSSIAN, (float("nan"),)), TransportKind.IN_PROCESS,
                        seed=1, event_bus=bus)
        self.assertEqual(started, [])


class TestSessionEvents(unittest.TestCase):
    def test_frame_sequence(self):
        bus = EventBus()
        frames = []
        finished = []
        bus.subscribe(EventType.FRAME_SENT,
                      lambda event_type, sender, message_type, frame: frames.append((sender, message_type)))
        bus.subscribe(EventType.KEY_ESTABLISHED, lambda event_type, token_id, outcome: finished.append(outcome))

        runner = SessionRunner(P, InProcessTransport(), bus,
                               SessionOptions(tamper=TamperMode.CORRUPT_QUERY, token_id="t"))
        outcome = runner.run(TEMPLATE, EXACT, seed=11)

        self.assertEqual(frames, [
            ("system", MessageType.SETUP),
            ("token", MessageType.TEMPLATE_RESPONSE),
            ("system", MessageType.QUERY),
            ("token", None),
            ("system", MessageType.QUERY),
            ("token", MessageType.MATCH_ANNOUNCE),
            ("system", MessageType.OUTCOME),
        ])
        self.assertEqual(finished, [outcome])


class TestTampering(unittest.TestCase):
    def setUp(self):
        self.query = encode(Query(round=0, challenge=b"s" * 32, verifiers=(Verifier(b"\x10" * 16),)), P)
        self.announce = encode(MatchAnnounce(round=0, index=0, tag=Tag(b"\x20" * 32)), P)

    def test_flip_tag_bit(self):
        tampered = decode(flip_tag_bit(self.announce, P), P)
        self.assertEqual(tampered.tag.value, b"\x21" + b"\x20" * 31)
        self.assertEqual(flip_tag_bit(self.query, P), self.query)

    def test_corrupt_query(self):
        tampered = decode(corrupt_query(self.query, P), P)
        self.assertEqual(tampered.verifiers[0].value, b"\x11" + b"\x10" * 15)

    def test_tamperer_modes(self):
        tamperer = Tamperer(TamperMode.CORRUPT_QUERY, P)
        self.assertNotEqual(tamperer.to_token(self.query, 0), self.query)
        self.assertEqual(tamperer.to_token(self.query, 1), self.query)
        self.assertEqual(tamperer.to_system(self.announce), self.announce)
        self.assertEqual(tamperer.frames_tampered, 1)

        untouched = Tamperer(TamperMode.FLIP_TAG_BIT, P)
        self.assertEqual(untouched.to_system(b"\xFF garbage"), b"\xFF garbage")
        self.assertEqual(untouched.frames_tampered, 0)


if __name__ == "__main__":
    unittest.main()
