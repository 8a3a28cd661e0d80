"""채널, 환경, 최적화기, 에이전트, 실험 드라이버 서비스 모듈"""
