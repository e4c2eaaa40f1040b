import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amoun.errors import (
    BudgetEmpty,
    GroupTooSmall,
    InvalidParameters,
    LengthMismatch,
    MalformedEnvelope,
    MessageTooLarge,
    ModuliNotCoprime,
)
from amoun.numeric import RandomSource
from amoun.scheme import (
    CiphertextEnvelope,
    GroupContext,
    KeyGenParams,
    PrivateKey,
    decode_message,
    decrypt,
    decrypt_int,
    derive_keys,
    encode_message,
    encrypt,
    group_init,
    key_generate,
    message_budget,
)

from tests.oracles import brute_inverse, naive_pow

MICRO_1 = dict(k=11, p=13, q=17, v=7, y=3)
MICRO_2 = dict(k=19, p=23, q=29, v=5, y=2)


@pytest.fixture
def micro():
    pk1, sk1 = derive_keys(**MICRO_1)
    pk2, sk2 = derive_keys(**MICRO_2)
    ctx = GroupContext.assemble([pk1, pk2], f=[2, 1], t=[1, 2], budget_bits=[3, 3])
    return ctx, (sk1, sk2)


def _oracle_public(k, p, q, v, y):
    n = k * p
    return n, (k * q + brute_inverse(y, v)) % n, naive_pow(v, k, n)


def test_params_validation():
    KeyGenParams()
    with pytest.raises(InvalidParameters):
        KeyGenParams(alpha_bits=512, v_bits=512)
    with pytest.raises(InvalidParameters):
        KeyGenParams(alpha_bits=64, v_bits=7, t_bits=8, r_bits=8)
    with pytest.raises(InvalidParameters):
        KeyGenParams(alpha_bits=64, v_bits=16, t_bits=0, r_bits=8)
    with pytest.raises(BudgetEmpty):
        KeyGenParams(alpha_bits=64, v_bits=48, t_bits=16, r_bits=16)


def test_scaled_params_match_defaults_at_1024():
    assert KeyGenParams.scaled(1024) == KeyGenParams()


def test_derive_keys_micro_example():
    pk, sk = derive_keys(**MICRO_1)
    assert (pk.n, pk.e, pk.d) == _oracle_public(**MICRO_1) == (143, 49, 106)
    assert sk == PrivateKey(11, 7, 3)
    assert pk.d % sk.k == sk.v
    pk2, _ = derive_keys(**MICRO_2)
    assert (pk2.n, pk2.e, pk2.d) == _oracle_public(**MICRO_2) == (437, 117, 214)


def test_derive_keys_rejects_bad_inputs():
    with pytest.raises(InvalidParameters):
        derive_keys(11, 11, 17, 7, 3)
    with pytest.raises(InvalidParameters):
        derive_keys(11, 13, 17, 7, 7)
    with pytest.raises(InvalidParameters):
        derive_keys(7, 13, 17, 11, 3)
    # k=5, p=7, q=3, v=2, y=1: e = 16 shares 2 with d
    with pytest.raises(InvalidParameters, match="gcd"):
        derive_keys(5, 7, 3, 2, 1)


def test_key_generate_shapes():
    params = KeyGenParams.scaled(128)
    pk, sk = key_generate(params, RandomSource(5))
    assert sk.k.bit_length() == 128
    assert sk.v.bit_length() == params.v_bits
    assert 1 <= sk.y < sk.v
    assert pk.n % sk.k == 0
    assert pk.n.bit_length() in (255, 256)
    assert pk.d % sk.k == sk.v
    assert key_generate(params, RandomSource(5)) == (pk, sk)


def test_distinct_seeds_give_distinct_moduli():
    params = KeyGenParams.scaled(64)
    moduli = {key_generate(params, RandomSource(seed))[0].n for seed in range(100)}
    assert len(moduli) == 100


def test_message_budget_examples():
    pk, _ = key_generate(KeyGenParams.scaled(64), RandomSource(1))
    assert KeyGenParams(1024, 512, 128, 128).budget_bits == 254
    assert KeyGenParams(64, 16, 8, 8).budget_bits == 15
    with pytest.raises(BudgetEmpty):
        message_budget(pk, KeyGenParams(64, 48, 16, 16))
    assert message_budget(pk, KeyGenParams.scaled(64)) == 14
    with pytest.raises(InvalidParameters):
        message_budget(pk, KeyGenParams.scaled(128))


def test_budget_inequality_micro():
    # m * (y^-1 + v*t*r) < k with k=11, y^-1=5, t=r=0
    k, y_inv, v, t, r = 11, 5, 7, 0, 0
    assert 1 * (y_inv + v * t * r) < k
    assert 3 * (y_inv + v * t * r) >= k


@settings(max_examples=200, deadline=None)
@given(
    alpha=st.integers(40, 2048),
    v=st.integers(8, 1024),
    t=st.integers(1, 512),
    r=st.integers(1, 512),
    data=st.data(),
)
def test_budget_is_worst_case_safe(alpha, v, t, r, data):
    try:
        params = KeyGenParams(alpha, v, t, r, 8)
    except InvalidParameters:
        return
    b = params.budget_bits
    # extreme admissible values: smallest alpha-bit k, largest everything else
    k = 1 << (alpha - 1)
    vmax = (1 << v) - 1
    y_inv = data.draw(st.integers(1, vmax - 1))
    m = (1 << b) - 1
    assert m * (y_inv + vmax * ((1 << t) - 1) * ((1 << r) - 1)) < k
    assert m < 1 << (v - 1)


def test_group_init_micro(micro):
    ctx, _ = micro
    assert [e.n_prime for e in ctx.entries] == [392, 865]
    assert ctx.x_modulus == 62491 == 143 * 437
    assert [e.ax for e in ctx.entries] == [7866, 54626]
    assert 7866 % 143 == 1 and 7866 % 437 == 0
    assert 54626 % 437 == 1 and 54626 % 143 == 0


def test_encrypt_decrypt_micro(micro):
    ctx, (sk1, sk2) = micro
    env = encrypt(ctx, [1, 4], coins=[0, 0])
    assert env.c == (1 * 49 * 7866 + 4 * 117 * 54626) % 62491 == 16637
    assert decrypt_int(sk1, env.c) == ((16637 % 11) * 3) % 7 == 1
    assert decrypt_int(sk2, env.c) == ((16637 % 19) * 2) % 5 == 4
    assert decrypt(sk1, env) == b"\x01"
    assert decrypt(sk2, env, length=2) == b"\x00\x04"


def test_all_zero_messages_give_zero(micro):
    ctx, (sk1, sk2) = micro
    env = encrypt(ctx, [0, 0], RandomSource(3))
    assert env.c == 0
    assert decrypt_int(sk1, 0) == decrypt_int(sk2, 0) == 0


def test_group_init_needs_two_keys():
    pk, _ = derive_keys(**MICRO_1)
    with pytest.raises(GroupTooSmall):
        group_init([pk], KeyGenParams.scaled(64), RandomSource(0))


def test_group_init_rejects_shared_moduli(amoun_pools):
    keys = amoun_pools(64)
    pks = [keys[0][0], keys[1][0], keys[0][0]]
    with pytest.raises(ModuliNotCoprime) as info:
        group_init(pks, KeyGenParams.scaled(64), RandomSource(0))
    assert (info.value.i, info.value.j) == (0, 2)


def test_group_init_draws_positive_blinding(amoun_pools):
    keys = amoun_pools(128)[:5]
    ctx = group_init([pk for pk, _ in keys], KeyGenParams.scaled(128), RandomSource(4))
    for entry in ctx.entries:
        pk = entry.public_key
        # N' = N*f + d*t with f, t >= 1
        assert entry.n_prime > pk.n + pk.d
        assert entry.budget_bits == KeyGenParams.scaled(128).budget_bits
    assert ctx.group_id and len(ctx) == 5


def test_encrypt_validates_inputs(micro):
    ctx, _ = micro
    with pytest.raises(LengthMismatch):
        encrypt(ctx, [1], RandomSource(0))
    with pytest.raises(MessageTooLarge) as info:
        encrypt(ctx, [1, 8], coins=[0, 0])
    assert info.value.index == 1
    with pytest.raises(MessageTooLarge):
        encrypt(ctx, [-1, 0], coins=[0, 0])
    with pytest.raises(LengthMismatch):
        encrypt(ctx, [1, 1], coins=[0])
    with pytest.raises(ValueError):
        encrypt(ctx, [1, 1])
    with pytest.raises(TypeError):
        encrypt(ctx, ["a", 1], coins=[0, 0])


def test_encrypt_parallel_matches_serial(amoun_pools):
    keys = amoun_pools(256)[:6]
    ctx = group_init([pk for pk, _ in keys], KeyGenParams.scaled(256), RandomSource(1))
    msgs = [bytes([i + 1]) * 5 for i in range(6)]
    serial = encrypt(ctx, msgs, RandomSource(9))
    parallel = encrypt(ctx, msgs, RandomSource(9), workers=4)
    assert serial == parallel
    for (_, sk), m in zip(keys, msgs):
        assert decrypt(sk, parallel, len(m)) == m


def test_roundtrip_small(amoun_pools):
    rng = RandomSource(77)
    keys = amoun_pools(128)[:4]
    params = KeyGenParams.scaled(128)
    ctx = group_init([pk for pk, _ in keys], params, rng)
    for _ in range(50):
        msgs = [rng.random_bits(params.budget_bits) for _ in keys]
        env = encrypt(ctx, msgs, rng)
        assert 0 <= env.c < ctx.x_modulus
        assert env.recipient_count == 4 and env.group_id == ctx.group_id
        assert [decrypt_int(sk, env.c) for _, sk in keys] == msgs


def test_decrypt_rejects_malformed_envelope(micro):
    _, (sk1, _) = micro
    with pytest.raises(MalformedEnvelope):
        decrypt(sk1, CiphertextEnvelope(-1))
    with pytest.raises(MalformedEnvelope):
        decrypt(sk1, CiphertextEnvelope(16637), length=0)


def test_encode_decode():
    assert encode_message(b"\x01\x02") == 258
    assert decode_message(258, 2) == b"\x01\x02"
    assert decode_message(258, 3) == b"\x00\x01\x02"
    with pytest.raises(ValueError):
        decode_message(258, 1)
    with pytest.raises(ValueError):
        decode_message(-1, 4)


@given(st.binary(max_size=64))
def test_encode_decode_roundtrip(data):
    assert decode_message(encode_message(data), len(data)) == data
