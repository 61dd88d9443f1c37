import Papa from "papaparse";

export const TRACE_COLUMNS = ["k", "elapsed_ns", "rse", "residual", "skips"] as const;
export const ENSEMBLE_COLUMNS = [
  "k",
  "elapsed_ns_median",
  "rse_min",
  "rse_median",
  "rse_max",
] as const;

export interface TraceRow {
  k: number;
  elapsed_ns: number;
  rse: number | null;
  residual: number;
  skips: number;
}

export interface EnsembleRow {
  k: number;
  elapsed_ns_median: number;
  rse_min: number | null;
  rse_median: number | null;
  rse_max: number | null;
}

export type ParsedCsv =
  | { kind: "trace"; rows: TraceRow[] }
  | { kind: "ensemble"; rows: EnsembleRow[] };

/** Raised when a file does not carry one of the two benchmark CSV schemas. */
export class SchemaError extends Error {}

function matchCount(header: string[], expected: readonly string[]): number {
  let n = 0;
  for (let i = 0; i < expected.length; i++) {
    if (header[i] === expected[i]) n++;
  }
  return n;
}

/** Report the first position where the header deviates from the schema it
 * most resembles, naming the offending column on both sides. */
function headerError(path: string, header: string[]): SchemaError {
  const expected =
    matchCount(header, ENSEMBLE_COLUMNS) > matchCount(header, TRACE_COLUMNS)
      ? ENSEMBLE_COLUMNS
      : TRACE_COLUMNS;
  for (let i = 0; i < expected.length; i++) {
    if (header[i] !== expected[i]) {
      const found = header[i] === undefined ? "nothing" : `'${header[i]}'`;
      return new SchemaError(
        `${path}:1: expected column '${expected[i]}' at position ${i + 1}, found ${found}`,
      );
    }
  }
  return new SchemaError(
    `${path}:1: expected ${expected.length} columns, found ${header.length}`,
  );
}

function toNumber(
  field: string,
  column: string,
  path: string,
  lineNo: number,
  allowEmpty: boolean,
): number | null {
  if (field === "") {
    if (allowEmpty) return null;
    throw new SchemaError(`${path}:${lineNo}: column '${column}' is empty`);
  }
  const v = Number(field);
  if (!Number.isFinite(v)) {
    throw new SchemaError(
      `${path}:${lineNo}: column '${column}': not a number: '${field}'`,
    );
  }
  return v;
}

/** Parse a benchmark CSV, classifying it as a per-trial trace or a trial
 * ensemble by its header line. */
export function parseCsv(text: string, path: string): ParsedCsv {
  const parsed = Papa.parse<string[]>(text, { delimiter: ",", skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${path}:${(e.row ?? 0) + 1}: ${e.message}`);
  }
  const records = parsed.data;
  if (records.length === 0) {
    throw new SchemaError(`${path}:1: expected a header line, found none`);
  }
  const header = records[0];
  const isTrace = matchCount(header, TRACE_COLUMNS) === TRACE_COLUMNS.length &&
    header.length === TRACE_COLUMNS.length;
  const isEnsemble =
    matchCount(header, ENSEMBLE_COLUMNS) === ENSEMBLE_COLUMNS.length &&
    header.length === ENSEMBLE_COLUMNS.length;
  if (!isTrace && !isEnsemble) throw headerError(path, header);
  const columns = isTrace ? TRACE_COLUMNS : ENSEMBLE_COLUMNS;

  const body: Record<string, number | null>[] = [];
  for (let r = 1; r < records.length; r++) {
    const fields = records[r];
    const lineNo = r + 1;
    if (fields.length !== columns.length) {
      throw new SchemaError(
        `${path}:${lineNo}: expected ${columns.length} fields, found ${fields.length}`,
      );
    }
    const row: Record<string, number | null> = {};
    for (let c = 0; c < columns.length; c++) {
      const allowEmpty = columns[c].startsWith("rse");
      row[columns[c]] = toNumber(fields[c], columns[c], path, lineNo, allowEmpty);
    }
    body.push(row);
  }
  return isTrace
    ? { kind: "trace", rows: body as unknown as TraceRow[] }
    : { kind: "ensemble", rows: body as unknown as EnsembleRow[] };
}
