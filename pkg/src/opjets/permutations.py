"""Symmetric group combinatorics: sums of permutations, block
permutations, and Koszul-signed actions on tensor powers.

Conventions, asserted by tests:
  - permutations are stored 1-based as image tuples; (p * q)(i) = p(q(i))
  - the action on a tensor power is a right action
    act(sigma): x_1 (x) ... (x) x_n -> x_sigma(1) (x) ... (x) x_sigma(n)
    so that act(sigma tau) = act(tau) o act(sigma)
"""

from .errors import DimensionError
from .tensors import shuffle_map


class Perm:

    __slots__ = ("images",)

    def __init__(self, images):
        images = tuple(images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise DimensionError("not a bijection: %r" % (images,))
        self.images = images

    @staticmethod
    def identity(n):
        return Perm(range(1, n + 1))

    @staticmethod
    def transposition(n, i):
        """Adjacent transposition (i, i+1) in S_n, 1-based."""
        im = list(range(1, n + 1))
        im[i - 1], im[i] = im[i], im[i - 1]
        return Perm(im)

    def __len__(self):
        return len(self.images)

    def __call__(self, i):
        return self.images[i - 1]

    def __mul__(self, other):
        """Function composition: (self * other)(i) = self(other(i))."""
        return Perm(self.images[other.images[i - 1] - 1]
                    for i in range(1, len(other.images) + 1))

    def inverse(self):
        inv = [0] * len(self.images)
        for i, x in enumerate(self.images):
            inv[x - 1] = i + 1
        return Perm(inv)

    def is_identity(self):
        return all(x == i + 1 for i, x in enumerate(self.images))

    def __eq__(self, other):
        return isinstance(other, Perm) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return "Perm%r" % (self.images,)

    def sign(self):
        s = 1
        im = self.images
        for a in range(len(im)):
            for b in range(a + 1, len(im)):
                if im[a] > im[b]:
                    s = -s
        return s

    def adjacent_word(self):
        """Write self as a product of adjacent transpositions; returns
        the list of positions i (meaning s_i = (i, i+1)) such that
        self = s_{i_1} * s_{i_2} * ... in this composition order."""
        im = list(self.images)
        word = []
        # bubble the permutation back to the identity
        changed = True
        while changed:
            changed = False
            for i in range(len(im) - 1):
                if im[i] > im[i + 1]:
                    im[i], im[i + 1] = im[i + 1], im[i]
                    word.append(i + 1)
                    changed = True
        # self * s_{w_1} * ... * s_{w_k} = id  =>  self = s_{w_k} ... s_{w_1}
        word.reverse()
        return word


def perm_sum(taus):
    """Blockwise sum: tau(off_j + k) = tau_j(k) + off_j."""
    images = []
    off = 0
    for t in taus:
        images.extend(t(k) + off for k in range(1, len(t) + 1))
        off += len(t)
    return Perm(images)


def block_perm(sigma, blocks):
    """Block permutation sigma_{m_1..m_n}: moves block j, preserving
    its inner order, to start after all blocks i with sigma(i) < sigma(j)."""
    n = len(sigma)
    if len(blocks) != n:
        raise DimensionError("block count mismatch")
    images = []
    for j in range(1, n + 1):
        off = sum(blocks[i - 1] for i in range(1, n + 1)
                  if sigma(i) < sigma(j))
        images.extend(off + k for k in range(1, blocks[j - 1] + 1))
    return Perm(images)


def act_on_factors(sigma, tb_src, tb_tgt=None):
    """Right action of sigma on a tensor product, as a GradedMap.

    Sends x_1 (x) ... (x) x_n to (+-) x_sigma(1) (x) ... (x) x_sigma(n)
    with the Koszul sign; target slot j holds source factor sigma(j)."""
    if tb_tgt is None:
        tb_tgt = tb_src
    n = len(sigma)
    perm = tuple(sigma(j + 1) - 1 for j in range(n))
    return shuffle_map(tb_src, perm, tb_tgt)
