"""Voice/silence traffic-shaping covert channel: encoder, carrier simulator,
passive decoder and wardens."""

__version__ = "0.1.0"

from ._accel import kernels  # noqa: E402
from .carriermodel import (ChannelProfile, NaturalUsageParams, PduRecord, PduTrace,  # noqa: E402
                           generate_natural_trace, natural_schedule, simulate_recognition,
                           synthesize_trace)
from .listener import (DecodeResult, DecoderParams, RunSegment, classify_pdu,  # noqa: E402
                       decode_trace, runs_to_bits, segment_runs)
from .metrics import ChannelMetrics, ber, goodput  # noqa: E402
from .symbolcodec import (BitMapping, Segment, SymbolKind, SymbolSchedule,  # noqa: E402
                          TimingParams, bits_to_schedule, decode_digits, deframe_bits,
                          encode_digits, frame_payload, payload_to_schedule, schedule_duration)
from .warden import (DetectionReport, NgramModel, evaluate_roc, text_anomaly_score,  # noqa: E402
                     traffic_regularity_score, train_ngram)

backend = kernels.backend
