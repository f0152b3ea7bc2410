import * as path from 'path';

import { describe, expect, it } from 'vitest';

import {
  ContainerFormatError,
  parseContainer,
  readContainer,
  writeContainer,
} from '../src/miec';

const FIXTURES = path.resolve(__dirname, '../../fixtures');

describe('MIEC container parsing', () => {
  it('reads the shared fixture with its sidecar', () => {
    const set = readContainer(path.join(FIXTURES, 'small9.miec'));
    expect(set.trials.length).toBe(9 * 4 * 4);
    expect(set.channels).toBe(22);
    expect(set.samples).toBe(200);
    expect(set.sampleRate).toBe(250);
    expect(set.channelNames).toHaveLength(22);
    expect(set.channelNames![0]).toBe('Fz');
    for (const t of set.trials) {
      expect(t.label).toBeGreaterThanOrEqual(1);
      expect(t.label).toBeLessThanOrEqual(4);
      expect(t.data.length).toBe(22 * 200);
    }
  });

  it('round-trips through the writer byte for byte', () => {
    const set = readContainer(path.join(FIXTURES, 'small9.miec'));
    const written = writeContainer(set);
    const reparsed = parseContainer(written);
    expect(reparsed.trials.length).toBe(set.trials.length);
    expect(Buffer.compare(writeContainer(reparsed), written)).toBe(0);
    for (let i = 0; i < 5; i++) {
      expect([...reparsed.trials[i].data]).toEqual([...set.trials[i].data]);
    }
  });

  it('rejects bad magic', () => {
    const set = readContainer(path.join(FIXTURES, 'small9.miec'));
    const bytes = writeContainer(set);
    bytes.write('XXXX1', 0, 'latin1');
    expect(() => parseContainer(bytes)).toThrow(ContainerFormatError);
    expect(() => parseContainer(bytes)).toThrow(/magic/);
  });

  it('rejects truncation, naming the trial index', () => {
    const set = readContainer(path.join(FIXTURES, 'small9.miec'));
    const bytes = writeContainer(set);
    expect(() => parseContainer(bytes.subarray(0, bytes.length - 10)))
      .toThrow(/trial 143/);
  });

  it('rejects trailing bytes and bad labels', () => {
    const set = readContainer(path.join(FIXTURES, 'small9.miec'));
    const bytes = writeContainer(set);
    expect(() => parseContainer(Buffer.concat([bytes, Buffer.from([0])])))
      .toThrow(/trailing/);
    const tampered = Buffer.from(bytes);
    tampered.writeUInt8(9, 23); // label byte of the first record
    expect(() => parseContainer(tampered)).toThrow(/label 9/);
  });
});
