/**
 * Sentence similarity over hashed bag-of-token embeddings.
 *
 * Each text is embedded as a counted bag of tokens hashed into a fixed
 * number of buckets, and pairs are compared by cosine. Counts are
 * non-negative, so the raw cosine already lies in [0, 1]; the affine map we
 * declare in the handshake is therefore the identity. Heavier models drop in
 * behind the same two functions.
 */

export const DIMENSIONS = 256;

export const AFFINE_MAP = { scale: 1, offset: 0 };

/** Mirror of the driver's normalization: lowercase, word runs and single
 * punctuation marks as tokens. */
export function tokenize(text: string): string[] {
  const matches = text.toLowerCase().match(/\w+|[^\w\s]/gu);
  return matches ?? [];
}

function bucket(token: string): number {
  // FNV-1a over the UTF-8 bytes, folded into the embedding width
  let h = 0x811c9dc5;
  for (const byte of Buffer.from(token, "utf8")) {
    h ^= byte;
    h = Math.imul(h, 0x01000193);
  }
  return (h >>> 0) % DIMENSIONS;
}

export function embed(text: string): Float64Array {
  const vec = new Float64Array(DIMENSIONS);
  for (const token of tokenize(text)) {
    vec[bucket(token)] += 1;
  }
  return vec;
}

function cosine(a: Float64Array, b: Float64Array): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < DIMENSIONS; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na === 0 || nb === 0) {
    return 0;
  }
  return dot / (Math.sqrt(na) * Math.sqrt(nb));
}

/** Similarity in [0, 1]; an empty side scores 0 by contract. */
export function score(candidate: string, reference: string): number {
  const raw = cosine(embed(candidate), embed(reference));
  const mapped = raw * AFFINE_MAP.scale + AFFINE_MAP.offset;
  return Math.min(1, Math.max(0, mapped));
}
