/**
 * Narrative splitting for encoders with a bounded token window (CLIP: 77).
 *
 * The paragraph is cut greedily at sentence boundaries so each sub-paragraph
 * keeps as much surrounding context as the window allows; when a sentence
 * itself exceeds the window, the cut backs off to any word boundary that
 * does not fall inside a noun phrase. A single phrase longer than the window
 * is unrepresentable and rejected.
 */

export interface PhraseSpan {
  phraseId: string;
  /** word index range [startWord, endWord) within the narrative */
  startWord: number;
  endWord: number;
}

export interface SubParagraph {
  text: string;
  startWord: number;
  endWord: number;
  phraseIds: string[];
}

export type TokenCounter = (words: string[]) => number;

const wordsPerToken: TokenCounter = (words) => words.length;

function isSentenceEnd(word: string): boolean {
  return /[.!?]["')\]]?$/.test(word);
}

export function splitNarrative(
  text: string,
  phrases: PhraseSpan[],
  maxTokens = 77,
  countTokens: TokenCounter = wordsPerToken,
): SubParagraph[] {
  const words = text.trim().split(/\s+/).filter((w) => w.length > 0);
  for (const p of phrases) {
    if (p.startWord < 0 || p.endWord > words.length || p.startWord >= p.endWord) {
      throw new Error(`phrase ${p.phraseId}: invalid span [${p.startWord}, ${p.endWord})`);
    }
    if (countTokens(words.slice(p.startWord, p.endWord)) > maxTokens) {
      throw new Error(`phrase ${p.phraseId} alone exceeds ${maxTokens} tokens`);
    }
  }
  for (let i = 0; i < phrases.length; i++) {
    for (let j = i + 1; j < phrases.length; j++) {
      const [a, b] = [phrases[i], phrases[j]];
      if (a.startWord < b.endWord && b.startWord < a.endWord) {
        throw new Error(`phrases ${a.phraseId} and ${b.phraseId} overlap`);
      }
    }
  }

  // A cut at word index k (sub-paragraph ends before k) must not split a phrase.
  const splitsPhrase = (k: number) =>
    phrases.some((p) => p.startWord < k && k < p.endWord);

  const out: SubParagraph[] = [];
  let start = 0;
  while (start < words.length) {
    // Longest prefix from `start` that fits the token window.
    let maxEnd = start;
    while (
      maxEnd < words.length &&
      countTokens(words.slice(start, maxEnd + 1)) <= maxTokens
    ) {
      maxEnd++;
    }
    if (maxEnd === start) {
      throw new Error(`word ${words[start]} alone exceeds ${maxTokens} tokens`);
    }

    let end = maxEnd;
    if (maxEnd < words.length) {
      // Prefer the latest sentence boundary inside the window.
      let cut = -1;
      for (let k = maxEnd; k > start; k--) {
        if (isSentenceEnd(words[k - 1]) && !splitsPhrase(k)) {
          cut = k;
          break;
        }
      }
      if (cut < 0) {
        // Back off to the latest word boundary that keeps phrases whole.
        for (let k = maxEnd; k > start; k--) {
          if (!splitsPhrase(k)) {
            cut = k;
            break;
          }
        }
      }
      if (cut < 0) {
        throw new Error(`no legal split point in window starting at word ${start}`);
      }
      end = cut;
    }

    out.push({
      text: words.slice(start, end).join(" "),
      startWord: start,
      endWord: end,
      phraseIds: phrases
        .filter((p) => p.startWord >= start && p.endWord <= end)
        .map((p) => p.phraseId),
    });
    start = end;
  }
  return out;
}
