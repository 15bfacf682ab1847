#!/usr/bin/python
# -*- coding: utf-8 -*-
import io
import os
import re

from trigreason.exceptions import ConfigException, EmptyLexicon

DEFAULT_PHRASES = (
    'wait', 'hmm', 'debatable',
    'maybe', 'perhaps', 'could be',
    'might be', 'possibly', 'on the other hand',
    'alternatively', 'another possibility', 'or perhaps',
    'actually', 'now that I think about it', 'I think I made a mistake',
    'let me reconsider', 'not sure', "I'm not entirely sure",
    'this might be wrong', 'I could be mistaken', "unless I'm wrong",
)


class HesitationLexicon(object):
    """
    Hesitation phrase set with a case-insensitive matcher anchored at word boundaries
    """

    def __init__(self, phrases=DEFAULT_PHRASES):
        self.phrases = tuple(phrase.strip() for phrase in phrases if phrase and phrase.strip())
        self._pattern = self._compile(self.phrases)

    @staticmethod
    def _phrase_pattern(phrase):
        parts = []
        for word in phrase.split():
            parts.append(re.escape(word).replace("\\'", "'").replace("'", "['’]"))
        return r'\s+'.join(parts)

    def _compile(self, phrases):
        if not phrases:
            return None
        # longest first so "or perhaps" is preferred over "perhaps"
        alternatives = [self._phrase_pattern(phrase) for phrase in sorted(phrases, key=len, reverse=True)]
        return re.compile(r'(?<!\w)(?:{})(?!\w)'.format('|'.join(alternatives)), re.IGNORECASE)

    def search(self, text):
        """
        First matched phrase or None
        :type text: str
        :rtype: str
        """
        if self._pattern is None or not text:
            return None
        matched = self._pattern.search(text)
        return matched.group(0) if matched else None

    def __len__(self):
        return len(self.phrases)


def load_lexicon(path=None):
    """
    Plain text lexicon, one phrase per line, '#' starts a comment
    :param path: None selects the default phrase list
    :rtype: HesitationLexicon
    :raises EmptyLexicon: the file holds no phrases
    """
    if path is None:
        return HesitationLexicon(DEFAULT_PHRASES)
    lexicon = HesitationLexicon(_read_phrases(path))
    if not len(lexicon):
        raise EmptyLexicon('file {} has no phrases'.format(path))
    return lexicon


def _read_phrases(path):
    if not os.path.isfile(path):
        raise ConfigException('HesitationLexicon', 'lexicon: file {} does not exist'.format(path))
    phrases = []
    with io.open(path, 'r', encoding='utf-8') as lexicon_file:
        for line in lexicon_file:
            phrase = line.split('#', 1)[0].strip()
            if phrase:
                phrases.append(phrase)
    return tuple(phrases)
