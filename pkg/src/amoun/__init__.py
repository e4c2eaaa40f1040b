"""AMOUN: asymmetric multi-recipient encryption with RSA baselines.

Research code. Not suitable for protecting real data.
"""
from .errors import (
    AmounError,
    BudgetEmpty,
    GroupTooSmall,
    IndexOutOfRange,
    InvalidParameters,
    LengthMismatch,
    MalformedEnvelope,
    MessageTooLarge,
    ModuliNotCoprime,
    NotInvertible,
    RetryBudgetExhausted,
)
from .numeric import RandomSource, ext_gcd, is_probable_prime, mod_inverse, mod_pow, random_prime
from .scheme import (
    CiphertextEnvelope,
    GroupContext,
    GroupEntry,
    KeyGenParams,
    PrivateKey,
    PublicKey,
    decode_message,
    decrypt,
    decrypt_int,
    derive_keys,
    encode_message,
    encrypt,
    generate_group_keys,
    group_add_recipient,
    group_init,
    group_remove_recipient,
    key_generate,
    message_budget,
)

__version__ = "0.1.0"
