/** Payload shapes of the protopal HTTP API, mirrored field by field. */

export interface ContinuousDomain {
  type: "continuous";
  min: number;
  max: number;
  units: string;
}

export interface OrdinalDomain {
  type: "ordinal";
  levels: number;
  level_names?: string[];
}

export interface BinaryDomain {
  type: "binary";
}

export type Domain = ContinuousDomain | OrdinalDomain | BinaryDomain;

export type Mutability = "fixed" | "intervenable" | "simulated";

export interface FeatureSpec {
  name: string;
  group: string;
  domain: Domain;
  mutability: Mutability;
}

export interface SchemaResponse {
  features: FeatureSpec[];
  digest: string;
}

export interface DiseaseInfo {
  code: string;
  name: string;
}

export interface DiseasesResponse {
  diseases: DiseaseInfo[];
}

export interface IndividualIn {
  id: string;
  values: Record<string, number>;
}

export interface NeighborhoodMember {
  index: number;
  distance: number;
  diseased: boolean;
}

export interface RiskEntry {
  disease: string;
  name: string;
  risk: number;
  nearest_diseased: number;
  nearest_healthy: number;
  neighborhood: {
    radius: number;
    members: NeighborhoodMember[];
  };
}

export interface RiskResponse {
  id: string;
  risks: RiskEntry[];
  warnings: string[];
}

export interface TwinPayload {
  base_id: string;
  prototype_index: number;
  prototype_class: string;
  assignments: Record<string, number>;
  values: Record<string, number>;
  risk_before: number;
  risk_after: number;
}

export interface ComparisonRow {
  feature: string;
  group: string;
  mutability: string;
  individual: number;
  healthy_twin: number;
  diseased_twin: number;
}

export interface ExplainResponse {
  disease: string;
  name: string;
  risk: number;
  nearest_healthy: number;
  nearest_diseased: number;
  healthy_profile: Record<string, number>;
  diseased_profile: Record<string, number>;
  /** Either twin may be absent in a degraded payload; the view must cope. */
  healthy_twin: TwinPayload | null;
  diseased_twin: TwinPayload | null;
  comparison: ComparisonRow[];
}

export interface PlanStep {
  feature: string;
  from_value: number;
  to_value: number;
  risk_before: number;
  risk_after: number;
  values: Record<string, number>;
}

export interface PlanResponse {
  disease: string;
  target_prototype: number;
  target_lifestyle: Record<string, number>;
  initial_risk: number;
  final_risk: number;
  stop_reason: string;
  steps: PlanStep[];
}

export interface SimulateRequest {
  individual: IndividualIn;
  disease: string;
  assignments: Record<string, number>;
  prototype_index?: number;
}

export interface PlanRequest {
  individual: IndividualIn;
  disease: string;
  stop_policy?: string;
  max_steps?: number;
}
