/**
 * MIEC epoch-container reader/writer (byte layout in docs/FORMATS.md).
 * Little-endian: 20-byte header, then per-trial records of
 * (subject u16, session u8, label u8, channel-major f32 samples).
 */

import * as fs from 'fs';

export interface Trial {
  data: Float64Array; // channel-major, length channels * samples
  label: number;      // 1..4
  subject: number;
  session: number;
}

export interface TrialSet {
  trials: Trial[];
  channels: number;
  samples: number;
  sampleRate: number;
  channelNames?: string[];
  cueWindow?: [number, number];
}

const MAGIC = 'MIEC1';
const HEADER_BYTES = 20;
const VALID_LABELS = new Set([1, 2, 3, 4]);

export class ContainerFormatError extends Error {}

export function parseContainer(buf: Buffer): TrialSet {
  if (buf.length < HEADER_BYTES) {
    throw new ContainerFormatError(
      `stream too short for header: ${buf.length} of ${HEADER_BYTES} bytes`,
    );
  }
  const magic = buf.toString('latin1', 0, 5);
  if (magic !== MAGIC) {
    throw new ContainerFormatError(`bad magic ${JSON.stringify(magic)}, expected ${MAGIC}`);
  }
  const version = buf.readUInt8(5);
  if (version !== 1) throw new ContainerFormatError(`unsupported container version ${version}`);
  const trialCount = buf.readUInt32LE(6);
  const channels = buf.readUInt16LE(10);
  const samples = buf.readUInt32LE(12);
  const sampleRate = buf.readUInt32LE(16) / 1000.0;

  const recordBytes = 4 + channels * samples * 4;
  const trials: Trial[] = [];
  let offset = HEADER_BYTES;
  for (let i = 0; i < trialCount; i++) {
    if (offset + recordBytes > buf.length) {
      throw new ContainerFormatError(
        `truncated stream in trial ${i}: ${buf.length - offset} of ${recordBytes} bytes`,
      );
    }
    const subject = buf.readUInt16LE(offset);
    const session = buf.readUInt8(offset + 2);
    const label = buf.readUInt8(offset + 3);
    if (!VALID_LABELS.has(label)) {
      throw new ContainerFormatError(`trial ${i}: label ${label} outside {1,2,3,4}`);
    }
    const n = channels * samples;
    const data = new Float64Array(n);
    for (let j = 0; j < n; j++) {
      const v = buf.readFloatLE(offset + 4 + 4 * j);
      if (!Number.isFinite(v)) {
        throw new ContainerFormatError(`trial ${i}: non-finite sample value`);
      }
      data[j] = v;
    }
    trials.push({ data, label, subject, session });
    offset += recordBytes;
  }
  if (offset !== buf.length) {
    throw new ContainerFormatError('trailing bytes after last declared trial');
  }
  return { trials, channels, samples, sampleRate };
}

export function readContainer(path: string): TrialSet {
  const set = parseContainer(fs.readFileSync(path));
  const sidecarPath = `${path}.json`;
  if (fs.existsSync(sidecarPath)) {
    const sidecar = JSON.parse(fs.readFileSync(sidecarPath, 'utf8'));
    if (Array.isArray(sidecar.channel_names)) {
      if (sidecar.channel_names.length !== set.channels) {
        throw new ContainerFormatError(
          `sidecar lists ${sidecar.channel_names.length} channel names for ${set.channels} channels`,
        );
      }
      set.channelNames = sidecar.channel_names;
    }
    if (Array.isArray(sidecar.cue_window_s)) {
      set.cueWindow = [sidecar.cue_window_s[0], sidecar.cue_window_s[1]];
    }
  }
  return set;
}

export function writeContainer(set: TrialSet): Buffer {
  const recordBytes = 4 + set.channels * set.samples * 4;
  const buf = Buffer.alloc(HEADER_BYTES + set.trials.length * recordBytes);
  buf.write(MAGIC, 0, 'latin1');
  buf.writeUInt8(1, 5);
  buf.writeUInt32LE(set.trials.length, 6);
  buf.writeUInt16LE(set.channels, 10);
  buf.writeUInt32LE(set.samples, 12);
  buf.writeUInt32LE(Math.round(set.sampleRate * 1000), 16);
  let offset = HEADER_BYTES;
  for (const trial of set.trials) {
    buf.writeUInt16LE(trial.subject, offset);
    buf.writeUInt8(trial.session, offset + 2);
    buf.writeUInt8(trial.label, offset + 3);
    for (let j = 0; j < trial.data.length; j++) {
      buf.writeFloatLE(Math.fround(trial.data[j]), offset + 4 + 4 * j);
    }
    offset += recordBytes;
  }
  return buf;
}

export function subjectsOf(set: TrialSet): number[] {
  return [...new Set(set.trials.map((t) => t.subject))].sort((a, b) => a - b);
}
