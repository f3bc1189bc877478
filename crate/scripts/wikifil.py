#!/usr/bin/env python3
"""Strip a MediaWiki XML dump to text8-style plain text, one article per line.

A Python port of Matt Mahoney's wikifil.pl: markup, links and references
are removed, digits are spelled out, and everything except a-z becomes a
single space.

    python scripts/wikifil.py enwiki.xml wiki.txt
"""
import re, sys
xml = open(sys.argv[1], encoding='utf-8').read()
out = []
digits = ['zero','one','two','three','four','five','six','seven','eight','nine']
for m in re.finditer(r'<text[^>]*>(.*?)</text>', xml, re.S):
    t = m.group(1)
    if t.lstrip().lower().startswith('#redirect'):
        continue
    t = re.sub(r'\{\{.*?\}\}', ' ', t, flags=re.S)
    t = t.replace('&lt;', '<').replace('&gt;', '>').replace('&quot;', '"').replace('&amp;', '&').replace('&nbsp;', ' ')
    t = re.sub(r'<ref[^<]*</ref>', '', t)
    t = re.sub(r'<[^>]*>', '', t)
    t = re.sub(r'\[http:[^\] ]*', '[', t)
    for tag in ('thumb', 'left', 'right'):
        t = re.sub(r'\|' + tag, '', t, flags=re.I)
    t = re.sub(r'\|\d+px', '', t, flags=re.I)
    t = re.sub(r'\[\[image:[^\[\]]*\|', '', t, flags=re.I)
    t = re.sub(r'\[\[category:([^|\]]*)[^\]]*\]\]', r'[[\1]]', t, flags=re.I)
    t = re.sub(r'\[\[[a-z\-]*:[^\]]*\]\]', '', t)
    t = re.sub(r'\[\[[^\|\]]*\|', '[[', t)
    t = re.sub(r'\{\{[^\}]*\}\}', '', t)
    t = re.sub(r'\{[^\}]*\}', '', t)
    t = t.replace('[', '').replace(']', '')
    t = re.sub(r'&[^;]*;', ' ', t)
    t = t.lower()
    for i, d in enumerate(digits):
        t = t.replace(str(i), ' ' + d + ' ')
    t = re.sub(r'[^a-z]+', ' ', t).strip()
    if t:
        out.append(t)
open(sys.argv[2], 'w').write('\n'.join(out) + '\n')
